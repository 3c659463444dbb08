#pragma once

#include <cstddef>
#include <vector>

namespace nspm {

// Dense symmetric d x d covariance matrix (d is small: observables are low
// dimensional). |A| denotes the entrywise max norm.
class CovarianceMatrix {
public:
    CovarianceMatrix() = default;
    explicit CovarianceMatrix(std::size_t dim) : dim_(dim), e_(dim * dim, 0.0) {}

    std::size_t dim() const noexcept { return dim_; }
    double& at(std::size_t a, std::size_t b) { return e_[a * dim_ + b]; }
    double at(std::size_t a, std::size_t b) const { return e_[a * dim_ + b]; }

    void symmetrize();
    double max_abs() const;  // |A| = max |A_ab|
    double min_eigenvalue() const;
    // clamps eigenvalues below to 0; throws if any eigenvalue < -hard_floor
    void clamp_psd(double hard_floor = 1e-10);
    // symmetric PSD square root
    CovarianceMatrix sqrt_psd() const;

    CovarianceMatrix& operator+=(const CovarianceMatrix& o);
    CovarianceMatrix& operator*=(double c);

    static double max_abs_difference(const CovarianceMatrix& a, const CovarianceMatrix& b);

private:
    std::size_t dim_ = 0;
    std::vector<double> e_;
};

}  // namespace nspm
