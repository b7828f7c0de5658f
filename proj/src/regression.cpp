#include "feedsim/regression.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

#include "feedsim/prob.hpp"

namespace feedsim {

OlsFit ols(const Vector& y, const Matrix& X) {
    const long n = X.rows();
    const int k = static_cast<int>(X.cols());
    if (y.size() != n) throw std::invalid_argument("ols: y and X row count differ");
    if (n <= k) throw std::invalid_argument("ols: need more observations than regressors");

    const Matrix xtx = X.transpose() * X;
    const auto solver = xtx.ldlt();
    OlsFit fit;
    fit.coef = solver.solve(X.transpose() * y);
    fit.resid = y - X * fit.coef;
    fit.n = n;
    fit.k = k;

    // HC1 sandwich
    Matrix meat = Matrix::Zero(k, k);
    for (long i = 0; i < n; ++i) {
        const double e2 = fit.resid(i) * fit.resid(i);
        meat.noalias() += e2 * (X.row(i).transpose() * X.row(i));
    }
    const Matrix bread = solver.solve(Matrix::Identity(k, k));
    const Matrix cov = (static_cast<double>(n) / static_cast<double>(n - k)) *
                       bread * meat * bread;
    fit.se.resize(k);
    for (int j = 0; j < k; ++j) fit.se(j) = std::sqrt(std::max(0.0, cov(j, j)));

    const double tss = (y.array() - y.mean()).square().sum();
    const double rss = fit.resid.squaredNorm();
    fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    return fit;
}

OlsFit simple_ols(const Vector& y, const Vector& x) {
    Matrix X(x.size(), 2);
    X.col(0).setOnes();
    X.col(1) = x;
    return ols(y, X);
}

TslsFit tsls(const Vector& y, const Vector& x, const Vector& z) {
    const long n = y.size();
    if (x.size() != n || z.size() != n) throw std::invalid_argument("tsls: length mismatch");
    if (n < 3) throw std::invalid_argument("tsls: too few observations");

    const OlsFit first = simple_ols(x, z);
    TslsFit fit;
    fit.n = n;
    fit.first_stage_coef = first.coef(1);
    const double t1 = first.se(1) > 0.0 ? first.coef(1) / first.se(1) : 0.0;
    fit.first_stage_f = t1 * t1;

    const Vector xhat = first.coef(0) + first.coef(1) * z.array();
    Matrix Xh(n, 2);
    Xh.col(0).setOnes();
    Xh.col(1) = xhat;
    const Matrix xtx = Xh.transpose() * Xh;
    const auto solver = xtx.ldlt();
    const Vector coef = solver.solve(Xh.transpose() * y);
    fit.intercept = coef(0);
    fit.slope = coef(1);

    // sandwich with structural residuals (actual regressor, projected design)
    const Vector u = y.array() - coef(0) - coef(1) * x.array();
    Matrix meat = Matrix::Zero(2, 2);
    for (long i = 0; i < n; ++i)
        meat.noalias() += u(i) * u(i) * (Xh.row(i).transpose() * Xh.row(i));
    const Matrix bread = solver.solve(Matrix::Identity(2, 2));
    const Matrix cov = (static_cast<double>(n) / static_cast<double>(n - 2)) *
                       bread * meat * bread;
    fit.se = std::sqrt(std::max(0.0, cov(1, 1)));
    return fit;
}

FTest joint_f_test(const Vector& d, const Matrix& X) {
    const long n = X.rows();
    if (d.size() != n) throw std::invalid_argument("joint_f_test: length mismatch");
    if (X.cols() < 2) throw std::invalid_argument("joint_f_test: need at least 2 covariates");

    // drop collinear columns (rank-revealing QR on the centered design)
    Matrix full(n, X.cols() + 1);
    full.col(0).setOnes();
    full.rightCols(X.cols()) = X;
    Eigen::ColPivHouseholderQR<Matrix> qr(full);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());

    FTest out;
    std::vector<int> keep;
    if (rank < full.cols()) {
        // greedily keep columns that increase rank, always keeping the intercept
        Matrix acc(n, 0);
        for (int j = 0; j < full.cols(); ++j) {
            Matrix trial(n, acc.cols() + 1);
            trial.leftCols(acc.cols()) = acc;
            trial.col(acc.cols()) = full.col(j);
            Eigen::ColPivHouseholderQR<Matrix> t(trial);
            t.setThreshold(1e-10);
            if (t.rank() == trial.cols()) {
                acc = trial;
                if (j > 0) keep.push_back(j - 1);
            } else if (j > 0) {
                out.dropped.push_back(j - 1);
            }
        }
    } else {
        for (int j = 0; j < X.cols(); ++j) keep.push_back(j);
    }

    Matrix design(n, keep.size() + 1);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < keep.size(); ++j) design.col(j + 1) = X.col(keep[j]);

    const int k = static_cast<int>(keep.size());
    if (n <= k + 1) throw std::invalid_argument("joint_f_test: insufficient observations");
    const Vector coef = (design.transpose() * design).ldlt().solve(design.transpose() * d);
    const double rss = (d - design * coef).squaredNorm();
    const double tss = (d.array() - d.mean()).square().sum();
    out.df1 = k;
    out.df2 = n - k - 1;
    if (rss <= 0.0 || tss <= rss) {
        out.f_stat = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        return out;
    }
    out.f_stat = ((tss - rss) / k) / (rss / static_cast<double>(out.df2));
    out.p_value = 1.0 - f_cdf(out.f_stat, out.df1, static_cast<double>(out.df2));
    return out;
}

}  // namespace feedsim
