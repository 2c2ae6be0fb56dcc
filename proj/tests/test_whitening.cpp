#include <doctest.h>

#include <random>

#include "revar/errors.hpp"
#include "revar/whitening.hpp"
#include "test_util.hpp"

using namespace revar;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

Eigen::MatrixXd random_orthonormal(int rows, int cols, unsigned seed) {
    const Eigen::MatrixXd g = gaussian(rows, cols, seed);
    return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
           Eigen::MatrixXd::Identity(rows, cols);
}

}  // namespace

TEST_CASE("identical columns are degenerate") {
    Eigen::MatrixXd x(4, 10);
    x.colwise() = Eigen::Vector4d{1.0, -2.0, 0.5, 3.0};
    CHECK_THROWS_WITH_AS(fit_pca(x, 0.999), doctest::Contains("degenerate covariance"),
                         NumericError);
}

TEST_CASE("iid unit-variance input recovers unit eigenvalues") {
    const Eigen::MatrixXd x = gaussian(6, 10000, 17);
    const WhiteningModel m = fit_pca(x, 1.0);
    REQUIRE(m.rank() == 6);
    for (int i = 0; i < 6; ++i) CHECK(m.eigvals[i] == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("planted spectrum and modes are recovered") {
    const int n_px = 16, n_frames = 50000;
    const Eigen::MatrixXd basis_true = random_orthonormal(n_px, 3, 3);
    const Eigen::Vector3d scales{3.0, 2.0, 1.0};
    const Eigen::MatrixXd x = basis_true * scales.asDiagonal() *
                              gaussian(3, n_frames, 4);

    const WhiteningModel m = fit_pca(x, 0.9999999);
    REQUIRE(m.rank() >= 3);
    CHECK(m.eigvals[0] == doctest::Approx(9.0).epsilon(0.05));
    CHECK(m.eigvals[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(m.eigvals[2] == doctest::Approx(1.0).epsilon(0.05));
    for (int i = 0; i < 3; ++i) {
        const double cosine = std::abs(basis_true.col(i).dot(m.basis.col(i)));
        CHECK(cosine > 0.99);
    }
}

TEST_CASE("basis is orthonormal and energy accounting holds") {
    const Eigen::MatrixXd x = gaussian(12, 400, 23);
    for (double threshold : {0.5, 0.9, 1.0}) {
        const WhiteningModel m = fit_pca(x, threshold);
        const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
        CHECK((gram - Eigen::MatrixXd::Identity(m.rank(), m.rank())).cwiseAbs().maxCoeff() <
              1e-10);
        // Recompute the total spectrum at full rank for the energy check.
        const WhiteningModel full = fit_pca(x, 1.0);
        CHECK(m.eigvals.sum() >= threshold * full.eigvals.sum() - 1e-12);
        for (int i = 1; i < m.rank(); ++i) CHECK(m.eigvals[i] <= m.eigvals[i - 1]);
        CHECK(m.eigvals[m.rank() - 1] > 0.0);
    }
}

TEST_CASE("whiten maps the mean to zero and a single mode to e_1") {
    const Eigen::MatrixXd x = gaussian(8, 300, 5);
    const WhiteningModel m = fit_pca(x, 1.0);

    Eigen::MatrixXd mean_only(8, 4);
    mean_only.colwise() = m.mu;
    CHECK(whiten(m, mean_only).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd one = m.mu + std::sqrt(m.eigvals[0]) * m.basis.col(0);
    const Eigen::MatrixXd z = whiten(m, one);
    CHECK(z(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(z.bottomRows(m.rank() - 1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("training coefficients are zero-mean with identity covariance") {
    const Eigen::MatrixXd x = gaussian(10, 4000, 29);
    const WhiteningModel m = fit_pca(x, 1.0);
    const Eigen::MatrixXd z = whiten(m, x);
    CHECK(z.rowwise().mean().cwiseAbs().maxCoeff() < 1e-10 * z.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd cov = z * z.transpose() / (z.cols() - 1.0);
    CHECK((cov - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <
          5.0 / std::sqrt(4000.0));
}

TEST_CASE("unwhiten inverts whiten at full rank") {
    const Eigen::MatrixXd x = gaussian(9, 500, 41) * 2.5;
    const WhiteningModel m = fit_pca(x, 1.0);
    const Eigen::MatrixXd back = unwhiten(m, whiten(m, x));
    CHECK((back - x).norm() < 1e-8 * x.norm());

    Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(m.rank(), 3);
    const Eigen::MatrixXd mean_back = unwhiten(m, zeros);
    for (int c = 0; c < 3; ++c) CHECK((mean_back.col(c) - m.mu).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("truncated reconstruction error equals the dropped eigenvalue energy") {
    const int n_px = 20, n_frames = 3000;
    // Spread spectrum so truncation drops a known amount.
    const Eigen::MatrixXd basis_true = random_orthonormal(n_px, n_px, 7);
    Eigen::VectorXd scales(n_px);
    for (int i = 0; i < n_px; ++i) scales[i] = std::pow(0.8, i) * 3.0;
    const Eigen::MatrixXd x = basis_true * scales.asDiagonal() * gaussian(n_px, n_frames, 8);

    const WhiteningModel full = fit_pca(x, 1.0);
    const WhiteningModel trunc = fit_pca(x, 0.95);
    REQUIRE(trunc.rank() < full.rank());

    const Eigen::MatrixXd recon = unwhiten(trunc, whiten(trunc, x));
    const double err_energy = (x - recon).squaredNorm();
    const double dropped =
        full.eigvals.tail(full.rank() - trunc.rank()).sum() * (n_frames - 1);
    CHECK(err_energy == doctest::Approx(dropped).epsilon(0.01));
}

TEST_CASE("dimension mismatches are rejected") {
    const Eigen::MatrixXd x = gaussian(6, 100, 2);
    const WhiteningModel m = fit_pca(x, 1.0);
    CHECK_THROWS_AS(whiten(m, gaussian(5, 10, 3)), ValidationError);
    CHECK_THROWS_AS(unwhiten(m, gaussian(m.rank() + 1, 10, 3)), ValidationError);
    CHECK_THROWS_AS(fit_pca(gaussian(4, 1, 9), 0.999), ValidationError);
    CHECK_THROWS_AS(fit_pca(x, 0.0), ValidationError);
    CHECK_THROWS_AS(fit_pca(x, 1.5), ValidationError);
}
