#include "htbb/maxvol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "htbb/errors.hpp"

namespace htbb {

double volume(const Matrix& a) {
    if (a.rows() < a.cols()) throw Error(Errc::not_tall, "volume needs rows >= cols");
    if (a.cols() == 0) return 1.0;
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix& packed = qr.matrixQR();
    double product = 1.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) product *= std::abs(packed(k, k));
    return product;
}

PivotedQR qr_pivoted(const Matrix& a) {
    const Eigen::Index n = a.rows(), m = a.cols(), k = std::min(n, m);
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    PivotedQR out;
    out.q = qr.householderQ() * Matrix::Identity(n, k);
    out.r = qr.matrixR().topRows(k).triangularView<Eigen::Upper>();
    const auto& indices = qr.colsPermutation().indices();
    out.perm.assign(indices.data(), indices.data() + indices.size());
    return out;
}

std::vector<int> maxvol_square(const Matrix& q, double tol, int max_iters) {
    const Eigen::Index n = q.rows(), r = q.cols();
    if (n < r) throw Error(Errc::not_tall, "maxvol needs rows >= cols");
    std::vector<int> rows(static_cast<std::size_t>(r));
    if (r == 0) return rows;
    if (n == r) {
        std::iota(rows.begin(), rows.end(), 0);
        return rows;
    }

    // Seed: the first r column pivots of Q^T select well-conditioned rows.
    Eigen::ColPivHouseholderQR<Matrix> seed(q.transpose());
    const auto& pivots = seed.colsPermutation().indices();
    for (Eigen::Index k = 0; k < r; ++k) rows[k] = pivots[k];
    const auto diag = seed.matrixR().diagonal();
    if (!(std::abs(diag(r - 1)) > 1e-14 * std::abs(diag(0))))
        throw Error(Errc::numerical_degeneracy, "input to maxvol is rank deficient");

    Matrix square(r, r);
    for (Eigen::Index k = 0; k < r; ++k) square.row(k) = q.row(rows[k]);
    // B = Q * Q[rows]^{-1}, solved through the transpose system.
    Matrix b = square.transpose().partialPivLu().solve(q.transpose()).transpose();

    for (int iter = 0; iter < max_iters; ++iter) {
        Eigen::Index i = 0, j = 0;
        const double peak = b.cwiseAbs().maxCoeff(&i, &j);
        if (peak <= tol) break;
        rows[j] = static_cast<int>(i);
        // Rank-one update of B after replacing row j of the submatrix by row i.
        Eigen::VectorXd column = b.col(j);
        Eigen::RowVectorXd delta = b.row(i);
        delta(j) -= 1.0;
        b.noalias() -= column * delta / b(i, j);
    }
    return rows;
}

std::vector<int> maxvol_rect(const Matrix& q, int dr, double tol, double square_tol, int max_iters) {
    if (dr < 0) throw Error(Errc::invalid_argument, "dr must be >= 0");
    std::vector<int> rows = maxvol_square(q, square_tol, max_iters);
    const Eigen::Index n = q.rows(), r = q.cols();
    const auto limit = static_cast<std::size_t>(std::min<Eigen::Index>(r + dr, n));
    if (rows.size() >= limit || r == 0) return rows;

    Matrix square(r, r);
    for (Eigen::Index k = 0; k < r; ++k) square.row(k) = q.row(rows[k]);
    Matrix b = square.transpose().partialPivLu().solve(q.transpose()).transpose();

    Eigen::VectorXd free = Eigen::VectorXd::Ones(n);
    for (int row : rows) free(row) = 0.0;
    Eigen::VectorXd f = free.cwiseProduct(b.rowwise().squaredNorm());
    while (rows.size() < limit) {
        Eigen::Index i = 0;
        if (f.maxCoeff(&i) <= tol * tol) break;
        rows.push_back(static_cast<int>(i));
        free(i) = 0.0;
        const Eigen::VectorXd v = b * b.row(i).transpose();
        const double l = 1.0 / (1.0 + v(i));
        const Eigen::RowVectorXd bi = b.row(i);
        b.noalias() -= l * v * bi;
        b.conservativeResize(Eigen::NoChange, b.cols() + 1);
        b.col(b.cols() - 1) = l * v;
        f = free.cwiseProduct(f - l * v.cwiseAbs2());
    }
    return rows;
}

}  // namespace htbb
