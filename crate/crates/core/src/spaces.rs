pub struct SpaceSpec; pub struct WeightFunction;
