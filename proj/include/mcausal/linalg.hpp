#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <complex>

namespace mcausal {

using Vec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Reinterpret an interleaved real vector (x1,y1,...,xK,yK) as a complex
// K-vector. Valid because std::complex<double> is layout-compatible with
// double[2].
inline Eigen::Map<const CVec> as_complex(const Vec& v) {
    return Eigen::Map<const CVec>(
        reinterpret_cast<const std::complex<double>*>(v.data()), v.size() / 2);
}

inline Vec from_complex(const CVec& z) {
    Vec v(2 * z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        v[2 * j] = z[j].real();
        v[2 * j + 1] = z[j].imag();
    }
    return v;
}

}  // namespace mcausal
