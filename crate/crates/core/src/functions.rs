pub struct FamilySpec; pub struct FamilyTag; pub struct TestFunction;
