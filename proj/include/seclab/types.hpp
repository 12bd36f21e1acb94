#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace seclab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Errors are split by origin so tests can distinguish a query outside the
// chart from a linear-algebra breakdown or a failed construction.
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};
struct degeneracy_error : std::runtime_error {
    explicit degeneracy_error(const std::string& what) : std::runtime_error(what) {}
};
struct construction_error : std::runtime_error {
    explicit construction_error(const std::string& what) : std::runtime_error(what) {}
};
struct region_error : std::runtime_error {
    explicit region_error(const std::string& what) : std::runtime_error(what) {}
};

/// Chart point. Coordinate ordering is fixed by the owning model:
/// fiber coordinates first, then (R_1, I_1, ..., R_k, I_k).
struct Point {
    Vec coords;

    Point() = default;
    explicit Point(Vec c) : coords(std::move(c)) {}
    static Point zero(int n) { return Point(Vec::Zero(n)); }

    int dim() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords[i]; }
    double& operator[](int i) { return coords[i]; }
};

/// One-form value at a point, components against the coordinate cobasis.
struct Covector {
    Vec comps;

    Covector() = default;
    explicit Covector(Vec c) : comps(std::move(c)) {}
    static Covector zero(int n) { return Covector(Vec::Zero(n)); }

    int dim() const { return static_cast<int>(comps.size()); }
    double operator()(const Vec& v) const { return comps.dot(v); }
    double norm() const { return comps.norm(); }
};

inline Covector operator+(const Covector& a, const Covector& b) { return Covector(a.comps + b.comps); }
inline Covector operator-(const Covector& a, const Covector& b) { return Covector(a.comps - b.comps); }
inline Covector operator*(double s, const Covector& a) { return Covector(s * a.comps); }

/// Two-form value at a point. `mat` is kept exactly antisymmetric; the
/// finite-difference assembler writes entries as d_ij - d_ji so the
/// invariant holds bitwise.
struct TwoForm {
    Mat mat;

    TwoForm() = default;
    explicit TwoForm(Mat m) : mat(std::move(m)) {}

    int dim() const { return static_cast<int>(mat.rows()); }
    double operator()(const Vec& v, const Vec& w) const { return v.dot(mat * w); }
    double antisymmetry_defect() const { return (mat + mat.transpose()).cwiseAbs().maxCoeff(); }
    static TwoForm antisymmetrize(const Mat& m) { return TwoForm(0.5 * (m - m.transpose().eval())); }
};

inline TwoForm operator-(const TwoForm& a, const TwoForm& b) { return TwoForm(a.mat - b.mat); }

enum class BasisTag { tangent, cotangent };

/// Pointwise linear map on the tangent or cotangent space.
struct LinearMap {
    Mat mat;
    BasisTag basis_tag = BasisTag::cotangent;

    LinearMap() = default;
    LinearMap(Mat m, BasisTag tag) : mat(std::move(m)), basis_tag(tag) {}

    int dim() const { return static_cast<int>(mat.rows()); }
    Vec apply(const Vec& v) const { return mat * v; }
    Covector apply(const Covector& xi) const { return Covector(mat * xi.comps); }

    /// Largest |eigenvalue-style| defect of J^2 + I, measured in operator norm.
    double square_plus_identity_norm() const {
        Mat defect = mat * mat + Mat::Identity(mat.rows(), mat.cols());
        return defect.operatorNorm();
    }

    /// Dual action on the other bundle: for a cotangent matrix M representing
    /// xi -> xi . J, the tangent action is M^T (and conversely).
    LinearMap dual() const {
        return LinearMap(mat.transpose(),
                         basis_tag == BasisTag::cotangent ? BasisTag::tangent : BasisTag::cotangent);
    }
};

}  // namespace seclab
