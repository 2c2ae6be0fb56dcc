#pragma once

#include <Eigen/Dense>

namespace revar {

/// Second spatial PCA, applied to the VAR residuals so the full analysis
/// chain maps training data to N(0, I) noise. Residuals are treated as
/// zero-mean; eigvals are floored at 1e-12 of the largest.
struct RewhitenModel {
    Eigen::MatrixXd basis;    ///< r x r orthogonal
    Eigen::VectorXd eigvals;  ///< length r, strictly positive

    int dim() const { return static_cast<int>(basis.rows()); }
};

/// Eigendecomposition of the residual sample covariance (zero-mean form).
/// Throws ValidationError when there are fewer residual columns than the
/// residual dimension, NumericError for all-zero residuals
/// ("degenerate residual covariance").
RewhitenModel fit_rewhiten(const Eigen::MatrixXd& resid);

/// W = diag(eigvals)^{-1/2} * basis^T * E.
Eigen::MatrixXd rewhiten(const RewhitenModel& model, const Eigen::MatrixXd& resid);

/// E = basis * diag(eigvals)^{1/2} * W. Exact inverse of rewhiten.
Eigen::MatrixXd colorize(const RewhitenModel& model, const Eigen::MatrixXd& white);

}  // namespace revar
