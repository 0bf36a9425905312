#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wobs {

/// Spatial point; only the first `dim` components are meaningful.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;
using Ten2 = std::array<Mat2, 2>;

inline constexpr int kMaxSpaceDim = 2;
/// (t, s, x1, x2): the ultra-hyperbolic frame lives in at most 4 variables.
inline constexpr int kMaxFrameVars = 4;

/// Tolerance used when deciding membership in open geometric sets.
inline constexpr double kGeomTol = 1e-12;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation's contract.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A mathematical hypothesis failed on the grid. Carries the offending nodes.
class VerificationError : public Error {
public:
    VerificationError(const std::string& what, std::vector<std::size_t> nodes = {})
        : Error(what), nodes_(std::move(nodes)) {}
    const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }

private:
    std::vector<std::size_t> nodes_;
};

/// Linear-algebra or time-stepping failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed scenario; `path` is the dotted field path.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

inline double dot(const Vec2& a, const Vec2& b, int dim) {
    double r = 0.0;
    for (int i = 0; i < dim; ++i) r += a[i] * b[i];
    return r;
}

inline double norm(const Vec2& a, int dim) {
    double r = 0.0;
    for (int i = 0; i < dim; ++i) r += a[i] * a[i];
    return std::sqrt(r);
}

inline double distance(const Point& a, const Point& b, int dim) {
    double r = 0.0;
    for (int i = 0; i < dim; ++i) r += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(r);
}

/// Smallest eigenvalue of the symmetric part of a dim x dim matrix.
double min_sym_eigenvalue(const Mat2& m, int dim);
/// Largest eigenvalue of the symmetric part of a dim x dim matrix.
double max_sym_eigenvalue(const Mat2& m, int dim);
/// Smallest generalized eigenvalue of sym(a) against SPD b.
double min_generalized_eigenvalue(const Mat2& a, const Mat2& b, int dim);

std::string format_point(const Point& p, int dim);

}  // namespace wobs
