#include "nonstat_pm/covariance.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace nspm {

namespace {

Eigen::MatrixXd to_eigen(const CovarianceMatrix& m) {
    Eigen::MatrixXd a(m.dim(), m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) a(i, j) = m.at(i, j);
    return a;
}

CovarianceMatrix from_eigen(const Eigen::MatrixXd& a) {
    CovarianceMatrix m(static_cast<std::size_t>(a.rows()));
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) m.at(i, j) = a(i, j);
    return m;
}

}  // namespace

void CovarianceMatrix::symmetrize() {
    for (std::size_t a = 0; a < dim_; ++a)
        for (std::size_t b = a + 1; b < dim_; ++b) {
            double v = 0.5 * (at(a, b) + at(b, a));
            at(a, b) = v;
            at(b, a) = v;
        }
}

double CovarianceMatrix::max_abs() const {
    double m = 0.0;
    for (double v : e_) m = std::max(m, std::abs(v));
    return m;
}

double CovarianceMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(*this));
    return es.eigenvalues().minCoeff();
}

void CovarianceMatrix::clamp_psd(double hard_floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(*this));
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -hard_floor)
        throw std::runtime_error("CovarianceMatrix: eigenvalue below -" +
                                 std::to_string(hard_floor));
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), 0.0);
    *this = from_eigen(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
    symmetrize();
}

CovarianceMatrix CovarianceMatrix::sqrt_psd() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(*this));
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
    return from_eigen(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

CovarianceMatrix& CovarianceMatrix::operator+=(const CovarianceMatrix& o) {
    if (o.dim_ != dim_) throw std::invalid_argument("CovarianceMatrix: dim mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
    return *this;
}

CovarianceMatrix& CovarianceMatrix::operator*=(double c) {
    for (double& v : e_) v *= c;
    return *this;
}

double CovarianceMatrix::max_abs_difference(const CovarianceMatrix& a, const CovarianceMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("CovarianceMatrix: dim mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    return m;
}

}  // namespace nspm
