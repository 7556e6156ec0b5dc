#pragma once

#include <vector>

#include <Eigen/Dense>

namespace htbb {

using Matrix = Eigen::MatrixXd;

/// A * P = Q * R with |R(n,n)| non-increasing; `perm[k]` is the column of A
/// placed at position k. Q is thin (n x min(n,m)).
struct PivotedQR {
    Matrix q;
    Matrix r;
    std::vector<int> perm;
};

/// sqrt(det(A^T A)) of a tall matrix.
double volume(const Matrix& a);

PivotedQR qr_pivoted(const Matrix& a);

/// Row positions of a dominant r x r submatrix of the n x r matrix `q`.
std::vector<int> maxvol_square(const Matrix& q, double tol = 1.01, int max_iters = 100);

/// Square maxvol followed by greedy growth of up to `dr` extra rows, adding
/// the row with the largest squared coefficient norm while it exceeds tol^2.
std::vector<int> maxvol_rect(const Matrix& q, int dr, double tol = 1.0, double square_tol = 1.01,
                             int max_iters = 100);

}  // namespace htbb
