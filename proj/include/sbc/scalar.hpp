#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Core>

#include <limits>

namespace sbc {

// Extended-precision scalar for ill-conditioned Gramian work. Feedback
// synthesis at large decay rates involves Gramians whose smallest eigenvalue
// sits ~18 orders of magnitude below the largest entry, and feedback gains
// whose closed-loop spectrum is pseudospectrally sensitive at the 1e-8 level.
// 50 decimal digits keep the full pipeline (assembly, Cholesky, gains,
// spectrum, propagation) self-consistent with margin to spare.
using xreal = boost::multiprecision::cpp_bin_float_50;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Scalar pi_v() {
    using std::acos;
    return acos(Scalar(-1));
}

inline double to_double(double x) { return x; }
inline double to_double(const xreal& x) { return static_cast<double>(x); }

template <typename Scalar>
MatrixX<double> to_double_matrix(const MatrixX<Scalar>& m) {
    MatrixX<double> out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = to_double(m(i, j));
    return out;
}

// Arithmetic precision of the synthesis/simulation pipeline.
enum class Precision { f64, extended };

}  // namespace sbc

namespace Eigen {

template <>
struct NumTraits<sbc::xreal> : GenericNumTraits<sbc::xreal> {
    typedef sbc::xreal Real;
    typedef sbc::xreal NonInteger;
    typedef sbc::xreal Nested;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 8,
        AddCost = 30,
        MulCost = 60
    };
    static inline Real epsilon() { return std::numeric_limits<sbc::xreal>::epsilon(); }
    static inline Real dummy_precision() { return Real("1e-40"); }
    static inline Real highest() { return (std::numeric_limits<sbc::xreal>::max)(); }
    static inline Real lowest() { return (std::numeric_limits<sbc::xreal>::lowest)(); }
    static inline int digits10() { return std::numeric_limits<sbc::xreal>::digits10; }
    static inline Real infinity() { return std::numeric_limits<sbc::xreal>::infinity(); }
    static inline Real quiet_NaN() { return std::numeric_limits<sbc::xreal>::quiet_NaN(); }
};

}  // namespace Eigen
