pub struct CaseId; pub struct VerificationReport;
