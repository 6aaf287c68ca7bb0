#include "flowmc/spectral.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace flowmc {

namespace {

struct Decomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
    double threshold;
};

Decomposition decompose(const Matrix& a, double rank_tolerance) {
    if (a.rows() != a.cols()) throw InvalidArgument("matrix is not square");
    const double scale = a.cwiseAbs().maxCoeff();
    if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
        throw InvalidArgument("matrix is not symmetric");
    if (a.size() == 0) return {Vector(), Matrix(), 0.0};

    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    const double largest = solver.eigenvalues().cwiseAbs().maxCoeff();
    return {solver.eigenvalues(), solver.eigenvectors(), rank_tolerance * largest};
}

Matrix invert_nonzero(const Decomposition& d, int* zeros) {
    Vector inv = Vector::Zero(d.eigenvalues.size());
    int z = 0;
    for (Eigen::Index k = 0; k < inv.size(); ++k) {
        if (std::abs(d.eigenvalues(k)) > d.threshold)
            inv(k) = 1.0 / d.eigenvalues(k);
        else
            ++z;
    }
    if (zeros) *zeros = z;
    Matrix p = d.eigenvectors * inv.asDiagonal() * d.eigenvectors.transpose();
    // Symmetrise away rounding in the reconstruction.
    return 0.5 * (p + p.transpose());
}

}  // namespace

Matrix pseudo_inverse(const Matrix& symmetric, double rank_tolerance) {
    return invert_nonzero(decompose(symmetric, rank_tolerance), nullptr);
}

int count_zero_eigenvalues(const Matrix& symmetric, double rank_tolerance) {
    const auto d = decompose(symmetric, rank_tolerance);
    int zeros = 0;
    for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k)
        if (std::abs(d.eigenvalues(k)) <= d.threshold) ++zeros;
    return zeros;
}

LaplacianBlocks partition_blocks(const Matrix& pinv, int n, int m) {
    if (n < 0 || m < 0 || pinv.rows() != n + m || pinv.cols() != n + m)
        throw DimensionMismatch("cannot partition " + std::to_string(pinv.rows()) + "x" +
                                std::to_string(pinv.cols()) + " matrix into " + std::to_string(n) +
                                "+" + std::to_string(m) + " blocks");
    return {pinv.topLeftCorner(n, n), pinv.topRightCorner(n, m), pinv.bottomLeftCorner(m, n),
            pinv.bottomRightCorner(m, m)};
}

LaplacianBlocks partition_blocks(const SpectralCore& core, int n, int m) {
    return partition_blocks(core.pinv(), n, m);
}

SpectralCore::SpectralCore(const BipartiteGraph& graph, double rank_tolerance)
    : n_(graph.n_left()),
      m_(graph.n_right()),
      rank_tolerance_(rank_tolerance),
      laplacian_(flowmc::laplacian(graph)),
      pinv_(Matrix::Zero(graph.n_vertices(), graph.n_vertices())),
      components_(connected_components(graph)) {
    for (int c = 0; c < components_.component_count; ++c) {
        const auto members = components_.members(c);
        const auto size = static_cast<Eigen::Index>(members.size());
        Matrix sub(size, size);
        for (Eigen::Index a = 0; a < size; ++a)
            for (Eigen::Index b = 0; b < size; ++b) sub(a, b) = laplacian_(members[a], members[b]);

        int zeros = 0;
        const Matrix sub_pinv = invert_nonzero(decompose(sub, rank_tolerance), &zeros);
        // A connected component's Laplacian has exactly one zero eigenvalue.
        if (zeros != 1)
            throw NumericalError("component " + std::to_string(c) + " has " +
                                 std::to_string(zeros) +
                                 " zero eigenvalues under the rank tolerance, expected 1");
        for (Eigen::Index a = 0; a < size; ++a)
            for (Eigen::Index b = 0; b < size; ++b) pinv_(members[a], members[b]) = sub_pinv(a, b);
    }
}

}  // namespace flowmc
