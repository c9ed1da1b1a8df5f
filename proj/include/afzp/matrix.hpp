#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afzp/cyclo.hpp"

namespace afzp {

/// Dense exact matrix over Q(zeta_N), row-major.
class Mat {
public:
    Mat(const FieldContext& ctx, int rows, int cols);

    static Mat zero(const FieldContext& ctx, int rows, int cols) { return Mat(ctx, rows, cols); }
    static Mat identity(const FieldContext& ctx, int n);
    static Mat scalar(const Scalar& s, int n);
    static Mat diag(const FieldContext& ctx, const std::vector<Scalar>& d);
    /// diag(zeta_p^{e_0}, zeta_p^{e_1}, ...).
    static Mat p_diag(const FieldContext& ctx, const std::vector<int>& exponents);
    /// Permutation matrix sending basis vector j to basis vector perm[j].
    static Mat permutation(const FieldContext& ctx, const std::vector<int>& perm);
    /// Matrix unit E_ij of the given size.
    static Mat unit(const FieldContext& ctx, int n, int i, int j);
    static Mat from_rows(const FieldContext& ctx, const std::vector<std::vector<Scalar>>& rows);

    const FieldContext& context() const noexcept { return *ctx_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    const Scalar& operator()(int i, int j) const { return e_[static_cast<std::size_t>(i * cols_ + j)]; }
    Scalar& at(int i, int j) { return e_[static_cast<std::size_t>(i * cols_ + j)]; }
    const std::vector<Scalar>& entries() const noexcept { return e_; }

    bool is_zero() const;
    bool is_identity() const;
    bool is_diagonal() const;
    /// The diagonal entries of a square matrix.
    std::vector<Scalar> diagonal() const;
    /// lambda when the matrix equals lambda * I.
    std::optional<Scalar> as_scalar() const;

    Mat dagger() const;
    Mat transpose() const;
    Scalar trace() const;
    Mat pow(int e) const;

    Mat block(int r0, int c0, int nr, int nc) const;
    void set_block(int r0, int c0, const Mat& b);

    friend Mat operator+(const Mat& a, const Mat& b);
    friend Mat operator-(const Mat& a, const Mat& b);
    friend Mat operator*(const Mat& a, const Mat& b);
    friend Mat operator*(const Mat& a, const Scalar& s);
    friend Mat operator*(const Scalar& s, const Mat& a) { return a * s; }
    Mat operator-() const;
    Mat& operator+=(const Mat& b);

    friend bool operator==(const Mat& a, const Mat& b);

    std::string to_string() const;

private:
    void check_ctx(const Mat& b) const;

    const FieldContext* ctx_;
    int rows_;
    int cols_;
    std::vector<Scalar> e_;
};

Mat kron(const Mat& a, const Mat& b);
Mat direct_sum(const std::vector<Mat>& blocks);
/// Conjugation x * a * x^dagger.
Mat conjugate(const Mat& x, const Mat& a);

/// True iff M^dagger M = I exactly.
bool is_unitary(const Mat& m);
/// True iff every row and column holds exactly one nonzero entry.
bool is_monomial(const Mat& m);

/// Eigen-data of an order-p unitary obtained by character averaging.
struct SpectralData {
    int p = 0;
    std::vector<Mat> projections;     // P_k, eigenvalue zeta_p^k
    std::vector<int> multiplicities;  // trace(P_k)
};

/// P_k = (1/p) sum_j zeta_p^{-kj} V^j. Throws NotOrderP unless V is unitary with V^p = I.
SpectralData spectral(const Mat& v, int p);

/// Permutation Q with Q^dagger D1 Q = D2 for diagonal matrices of p-th roots of unity.
/// Equal eigenvalues are matched in increasing index order. Throws MultisetMismatch.
Mat match_diagonals(const Mat& d1, const Mat& d2, int p);

/// Exponents k with diagonal entry zeta_p^k; throws NotOrderP for other entries.
std::vector<int> p_diagonal_exponents(const Mat& d);
/// Count of each exponent 0..p-1 in an exponent list.
std::vector<int> exponent_counts(const std::vector<int>& exps, int p);

struct Solution {
    Mat particular;                // n x c
    std::vector<Mat> null_basis;   // each n x 1
};

/// Solves A x = b exactly by Gauss-Jordan elimination (first nonzero pivot,
/// row-major scan). Throws Inconsistent when no solution exists.
Solution solve(const Mat& a, const Mat& rhs);
/// Basis of {x : A x = 0} as column vectors, in free-variable order.
std::vector<Mat> null_space(const Mat& a);
/// Rank of a matrix.
int rank(const Mat& a);

/// Row-major vectorization to a column vector and back.
Mat vec(const Mat& m);
Mat unvec(const Mat& v, int rows, int cols);

/// Unitary p-point Fourier matrix F with columns f_r = c (zeta_p^{rj})_j,
/// so F^dagger S F = diag(zeta_p^{-r}) for the cyclic shift S e_j = e_{j+1}.
/// Requires a normalizer with |c|^2 = 1/p in the field.
Mat fourier_matrix(const FieldContext& ctx);
/// Cyclic shift S with S e_j = e_{j+1 mod n}.
Mat cyclic_shift(const FieldContext& ctx, int n);

}  // namespace afzp
