#pragma once

#include <Eigen/Dense>

namespace revar {

/// Spatial PCA of the vectorized training data. Columns of `basis` are
/// orthonormal spatial modes over the in-mask pixels; `eigvals` are the
/// corresponding mode variances in m^2, sorted non-increasing.
struct WhiteningModel {
    Eigen::VectorXd mu;      ///< per-pixel temporal mean, length P
    Eigen::MatrixXd basis;   ///< P x r, orthonormal columns
    Eigen::VectorXd eigvals; ///< length r, strictly positive, non-increasing

    int rank() const { return static_cast<int>(basis.cols()); }
    int pixel_dim() const { return static_cast<int>(basis.rows()); }
};

/// Fit the spatial PCA of a P x T pixel matrix via SVD of the centered data.
/// Retains the smallest rank whose cumulative eigenvalue sum reaches
/// `energy_threshold` of the total, and drops modes below 1e-12 of the
/// leading eigenvalue. Basis column signs are fixed so the largest-magnitude
/// entry of each column is positive.
///
/// Throws ValidationError for T < 2 or energy_threshold outside (0, 1],
/// NumericError for all-constant data ("degenerate covariance").
WhiteningModel fit_pca(const Eigen::MatrixXd& data, double energy_threshold);

/// Z = diag(eigvals)^{-1/2} * basis^T * (X - mu*1^T). Result is r x T.
Eigen::MatrixXd whiten(const WhiteningModel& model, const Eigen::MatrixXd& data);

/// X = basis * diag(eigvals)^{1/2} * Z + mu*1^T. Exact inverse of whiten on
/// the retained coefficient space.
Eigen::MatrixXd unwhiten(const WhiteningModel& model, const Eigen::MatrixXd& coeffs);

}  // namespace revar
