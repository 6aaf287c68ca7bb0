#pragma once

#include "flowmc/common.hpp"
#include "flowmc/graph.hpp"

namespace flowmc {

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Moore-Penrose pseudoinverse of a symmetric matrix via eigendecomposition.
/// Eigenvalues with |lambda| <= rank_tolerance * max|lambda| are treated as zero.
/// Throws InvalidArgument if the input is not symmetric to 1e-12 relative and
/// NumericalError if the eigensolver fails.
Matrix pseudo_inverse(const Matrix& symmetric, double rank_tolerance = kDefaultRankTolerance);

/// Number of eigenvalues that pseudo_inverse would treat as zero.
int count_zero_eigenvalues(const Matrix& symmetric, double rank_tolerance = kDefaultRankTolerance);

/// The four blocks of an (n+m)x(n+m) matrix split after row/column n.
struct LaplacianBlocks {
    Matrix g11;  // n x n
    Matrix g12;  // n x m
    Matrix g21;  // m x n
    Matrix g22;  // m x m
};

LaplacianBlocks partition_blocks(const Matrix& pinv, int n, int m);

/// Laplacian, its pseudoinverse and component structure for one observation
/// graph. The pseudoinverse is computed component by component and assembled
/// block-diagonally, which equals the pseudoinverse of the full Laplacian.
class SpectralCore {
public:
    SpectralCore(const BipartiteGraph& graph, double rank_tolerance = kDefaultRankTolerance);

    int n() const { return n_; }
    int m() const { return m_; }
    double rank_tolerance() const { return rank_tolerance_; }

    const Matrix& laplacian() const { return laplacian_; }
    const Matrix& pinv() const { return pinv_; }
    const ComponentLabeling& components() const { return components_; }

    bool connected(int i, int j) const {
        return components_.component_id[i] == components_.component_id[n_ + j];
    }

    LaplacianBlocks blocks() const { return partition_blocks(pinv_, n_, m_); }

private:
    int n_;
    int m_;
    double rank_tolerance_;
    Matrix laplacian_;
    Matrix pinv_;
    ComponentLabeling components_;
};

LaplacianBlocks partition_blocks(const SpectralCore& core, int n, int m);

}  // namespace flowmc
