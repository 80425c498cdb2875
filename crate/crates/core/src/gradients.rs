pub struct TildeProfile; pub fn tilde_profiles() {} pub fn multiplicative_rhs() {}
