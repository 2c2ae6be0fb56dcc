#pragma once

#include <Eigen/Dense>
#include <vector>

namespace revar {

/// Vector autoregressive model of order p on r-dimensional whitened
/// coefficient vectors: z_t = sum_i A_i z_{t-i} + e_t, intercept-free.
struct VarModel {
    std::vector<Eigen::MatrixXd> coeffs;  ///< A_1..A_p, each r x r

    int order() const { return static_cast<int>(coeffs.size()); }
    int dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.front().rows()); }
};

struct StabilityReport {
    bool stable = false;
    double spectral_radius = 0.0;
};

/// Ordinary least squares fit over the stacked lag design, solved by
/// column-pivoted QR. Requires T > p*r + p samples.
/// Throws ValidationError on insufficient samples or a rank-deficient
/// design ("collinear lags").
VarModel fit_var(const Eigen::MatrixXd& coeffs_series, int order);

/// One-step prediction residuals e_t = z_t - sum_i A_i z_{t-i} for
/// t = p+1..T. Result is r x (T-p).
Eigen::MatrixXd residuals(const VarModel& model, const Eigen::MatrixXd& coeffs_series);

/// Spectral radius of the pr x pr companion matrix; stable when < 1 - 1e-9.
StabilityReport is_stable(const VarModel& model);

/// Rescale A_i <- A_i * rho^i with rho = (1 - 1e-6) / radius so the
/// companion spectral radius becomes exactly 1 - 1e-6. No-op on stable
/// models. Returns the rho applied (1.0 when untouched).
double stabilize(VarModel& model);

/// Run the recursion z_t = sum_i A_i z_{t-i} + eta_t. `init` supplies the
/// p most recent states (oldest first); `innovations` has burn_in + n_keep
/// columns and the final n_keep columns of the trajectory are returned.
/// Throws NumericError on an unstable model or a non-finite state.
Eigen::MatrixXd simulate(const VarModel& model, const Eigen::MatrixXd& innovations,
                         const Eigen::MatrixXd& init, int n_keep);

/// Bayesian information criterion order selection over orders 1..max_order.
int select_order_bic(const Eigen::MatrixXd& coeffs_series, int max_order);

}  // namespace revar
