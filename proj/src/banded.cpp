#include "floc/banded.hpp"

#include <algorithm>
#include <cmath>

#include "floc/errors.hpp"

namespace floc {

BandedMatrix::BandedMatrix(int dim, int bandwidth)
    : dim_(dim), bw_(std::min(bandwidth, dim > 0 ? dim - 1 : 0)) {
    if (dim <= 0) throw ConfigError("banded matrix dimension must be positive");
    if (bandwidth < 0) throw ConfigError("bandwidth must be non-negative");
    band_ = Eigen::MatrixXd::Zero(bw_ + 1, dim_);
}

double& BandedMatrix::at(int i, int j) {
    if (i < j) std::swap(i, j);
    return band_(i - j, j);
}

double BandedMatrix::get(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) return 0.0;
    return band_(i - j, j);
}

void BandedMatrix::add_scaled(const BandedMatrix& other, double scale) {
    if (other.dim_ != dim_ || other.bw_ > bw_)
        throw ConfigError("banded add: incompatible shapes");
    band_.topRows(other.bw_ + 1) += scale * other.band_;
}

void BandedMatrix::add_diagonal(double value) {
    band_.row(0).array() += value;
}

double BandedMatrix::trace() const { return band_.row(0).sum(); }

Eigen::VectorXd BandedMatrix::multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    for (int j = 0; j < dim_; ++j) {
        out[j] += band_(0, j) * x[j];
        const int top = std::min(bw_, dim_ - 1 - j);
        for (int d = 1; d <= top; ++d) {
            out[j + d] += band_(d, j) * x[j];
            out[j] += band_(d, j) * x[j + d];
        }
    }
    return out;
}

double BandedMatrix::quad_form(const Eigen::VectorXd& x) const {
    return x.dot(multiply(x));
}

Eigen::MatrixXd BandedMatrix::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int j = 0; j < dim_; ++j)
        for (int d = 0; d <= std::min(bw_, dim_ - 1 - j); ++d) {
            out(j + d, j) = band_(d, j);
            out(j, j + d) = band_(d, j);
        }
    return out;
}

BandedLdlt::BandedLdlt(const BandedMatrix& a) : dim_(a.dim()), bw_(a.bandwidth()) {
    scale_.resize(dim_);
    for (int j = 0; j < dim_; ++j) {
        const double d = a.get(j, j);
        if (!(d > 0.0) || !std::isfinite(d))
            throw SingularSystem("non-positive diagonal at index " + std::to_string(j));
        scale_[j] = 1.0 / std::sqrt(d);
    }

    fact_.resize(bw_ + 1, dim_);
    fact_.setZero();
    for (int j = 0; j < dim_; ++j)
        for (int d = 0; d <= std::min(bw_, dim_ - 1 - j); ++d)
            fact_(d, j) = a.get(j + d, j) * scale_[j + d] * scale_[j];

    // in-place LDL^T on the equilibrated matrix
    for (int j = 0; j < dim_; ++j) {
        double d = fact_(0, j);
        for (int k = std::max(0, j - bw_); k < j; ++k) {
            const double l = fact_(j - k, k);
            d -= l * l * fact_(0, k);
        }
        if (!(d > 0.0) || !std::isfinite(d))
            throw SingularSystem("non-positive pivot at index " + std::to_string(j));
        fact_(0, j) = d;
        const int last = std::min(j + bw_, dim_ - 1);
        for (int i = j + 1; i <= last; ++i) {
            double v = fact_(i - j, j);
            for (int k = std::max(0, i - bw_); k < j; ++k)
                v -= fact_(i - k, k) * fact_(j - k, k) * fact_(0, k);
            fact_(i - j, j) = v / d;
        }
    }
}

Eigen::VectorXd BandedLdlt::solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != dim_) throw ConfigError("banded solve: rhs size mismatch");
    Eigen::VectorXd z = scale_.cwiseProduct(rhs);
    for (int j = 0; j < dim_; ++j)
        for (int k = std::max(0, j - bw_); k < j; ++k) z[j] -= fact_(j - k, k) * z[k];
    for (int j = 0; j < dim_; ++j) z[j] /= fact_(0, j);
    for (int j = dim_ - 1; j >= 0; --j) {
        const int last = std::min(j + bw_, dim_ - 1);
        for (int i = j + 1; i <= last; ++i) z[j] -= fact_(i - j, j) * z[i];
    }
    return scale_.cwiseProduct(z);
}

BandedMatrix BandedLdlt::inverse_band() const {
    // Takahashi recursion: Z(i,j) = delta(i,j)/D(j) - sum_{k>j} L(k,j) Z(k,i),
    // filled column by column from the bottom-right corner. Every Z entry the
    // sum touches lies inside the band and is already available.
    BandedMatrix z(dim_, bw_);
    for (int j = dim_ - 1; j >= 0; --j) {
        const int last = std::min(j + bw_, dim_ - 1);
        for (int i = last; i >= j; --i) {
            double s = (i == j) ? 1.0 / fact_(0, j) : 0.0;
            for (int k = j + 1; k <= last; ++k) s -= fact_(k - j, j) * z.at(k, i);
            z.at(i, j) = s;
        }
    }
    for (int j = 0; j < dim_; ++j)
        for (int d = 0; d <= std::min(bw_, dim_ - 1 - j); ++d)
            z.at(j + d, j) *= scale_[j + d] * scale_[j];
    return z;
}

}  // namespace floc
