//! Douglas and projective-flatness criteria: the numerical Douglas test, the
//! adapted frame, per-case tensor conditions, spray forms, closed forms of the
//! projective factor and a region classifier.

mod classify;
mod douglas;
mod frame;
mod projective;
mod prop34;
mod rij;
mod spray_form;

pub use classify::{classify, compatible_cases, Classification, PointEvidence, KROPINA_LABEL, MIN_POINTS, NOT_DOUGLAS};
pub use douglas::{lstsq, douglas_fit, douglas_fit_default, quadratic_spray_fit, DouglasFit, QuadraticSprayFit, DOUGLAS_THRESHOLD};
pub use frame::{frame_from, special_frame, SpecialFrame};
pub use projective::{projective_factor_formula, ProjectiveCase, ProjectiveFormula};
pub use prop34::{default_s_grid, prop34_residual, prop35_residual, GridReport, GridResidual, KropinaRelations};
pub use rij::{
    case_constants, rij_condition_check, rij_condition_check_with, CaseConstants, ConditionReport, RijCase, Verdict,
    RIJ_THRESHOLD,
};
pub use spray_form::{form_constants, spray_form_fit, SprayFormCase, SprayFormFit, SPRAY_FORM_THRESHOLD};
