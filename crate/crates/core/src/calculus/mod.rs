//! Algebraic expressions over Grassmann variables and their metric
//! derivatives, with numerical checks in coefficient space.

mod derivative;
mod expr;
mod ibp;
mod numeric;
mod random;

pub use derivative::{metric_derivative, MetricDerivativeKind};
pub use expr::{Assignment, Expression, Restriction};
pub use ibp::{check_integration_by_parts, AnalyticIbp, Estimate, IbpReport};
pub use numeric::{check_local_behaviour, coefficient_partial, fd_step, Evaluable, LocalBehaviour};
pub use random::random_expression;
