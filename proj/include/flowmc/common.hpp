#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flowmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Errors --------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DisconnectedPair : public Error {
public:
    DisconnectedPair(int row, int col)
        : Error("row " + std::to_string(row) + " and column " + std::to_string(col) +
                " lie in different components"),
          row_(row), col_(col) {}
    int row() const { return row_; }
    int col() const { return col_; }

private:
    int row_;
    int col_;
};

class InvalidPath : public Error {
public:
    using Error::Error;
};

class InvalidFlow : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Dense row-major table of arbitrary cells. Used for per-entry reports where
// a cell can carry "no value" (std::optional) rather than a sentinel double.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) { return cells_[index(i, j)]; }
    const T& operator()(int i, int j) const { return cells_[index(i, j)]; }

    const std::vector<T>& cells() const { return cells_; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols_ + j; }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> cells_;
};

/// Effective resistance between two vertices. Disconnected pairs carry an
/// explicit infinite tag instead of a floating-point infinity so that reports
/// can tell "unidentifiable" apart from "numerically huge".
class Resistance {
public:
    static Resistance finite(double value) { return Resistance(value); }
    static Resistance infinite() { return Resistance(); }

    bool is_finite() const { return value_.has_value(); }
    double value() const {
        if (!value_) throw Error("resistance is infinite");
        return *value_;
    }
    /// Floating-point view; +inf when disconnected.
    double as_double() const {
        return value_ ? *value_ : std::numeric_limits<double>::infinity();
    }

    Resistance operator+(const Resistance& other) const {
        if (!is_finite() || !other.is_finite()) return infinite();
        return finite(*value_ + *other.value_);
    }

    bool operator==(const Resistance&) const = default;

private:
    Resistance() = default;
    explicit Resistance(double v) : value_(v) {}
    std::optional<double> value_;
};

using EstimateGrid = Grid<std::optional<double>>;
using ResistanceGrid = Grid<Resistance>;

}  // namespace flowmc
