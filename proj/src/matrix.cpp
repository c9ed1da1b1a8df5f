#include "afzp/matrix.hpp"

#include <sstream>

#include "afzp/error.hpp"

namespace afzp {

namespace {

std::string shape(const Mat& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

Mat::Mat(const FieldContext& ctx, int rows, int cols) : ctx_(&ctx), rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw Error(ErrorCode::ShapeMismatch, "negative matrix dimension");
    e_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Scalar(ctx));
}

Mat Mat::identity(const FieldContext& ctx, int n) {
    Mat m(ctx, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Scalar::one(ctx);
    return m;
}

Mat Mat::scalar(const Scalar& s, int n) {
    Mat m(s.context(), n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = s;
    return m;
}

Mat Mat::diag(const FieldContext& ctx, const std::vector<Scalar>& d) {
    const int n = static_cast<int>(d.size());
    Mat m(ctx, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = d[static_cast<std::size_t>(i)];
    return m;
}

Mat Mat::p_diag(const FieldContext& ctx, const std::vector<int>& exponents) {
    std::vector<Scalar> d;
    d.reserve(exponents.size());
    for (int e : exponents) d.push_back(Scalar::p_root(ctx, e));
    return diag(ctx, d);
}

Mat Mat::permutation(const FieldContext& ctx, const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    Mat m(ctx, n, n);
    for (int j = 0; j < n; ++j) m.at(perm[static_cast<std::size_t>(j)], j) = Scalar::one(ctx);
    return m;
}

Mat Mat::unit(const FieldContext& ctx, int n, int i, int j) {
    Mat m(ctx, n, n);
    m.at(i, j) = Scalar::one(ctx);
    return m;
}

Mat Mat::from_rows(const FieldContext& ctx, const std::vector<std::vector<Scalar>>& rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
    Mat m(ctx, r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c)
            throw Error(ErrorCode::ShapeMismatch, "ragged rows");
        for (int j = 0; j < c; ++j) m.at(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

void Mat::check_ctx(const Mat& b) const {
    if (ctx_ != b.ctx_) throw Error(ErrorCode::ContextMismatch, "matrices over different fields");
}

bool Mat::is_zero() const {
    for (const auto& s : e_)
        if (!s.is_zero()) return false;
    return true;
}

bool Mat::is_identity() const {
    if (!is_square()) return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) {
            const Scalar& s = (*this)(i, j);
            if (i == j ? !s.is_one() : !s.is_zero()) return false;
        }
    return true;
}

bool Mat::is_diagonal() const {
    if (!is_square()) return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (i != j && !(*this)(i, j).is_zero()) return false;
    return true;
}

std::vector<Scalar> Mat::diagonal() const {
    std::vector<Scalar> d;
    for (int i = 0; i < std::min(rows_, cols_); ++i) d.push_back((*this)(i, i));
    return d;
}

std::optional<Scalar> Mat::as_scalar() const {
    if (!is_diagonal() || rows_ == 0) return std::nullopt;
    for (int i = 1; i < rows_; ++i)
        if ((*this)(i, i) != (*this)(0, 0)) return std::nullopt;
    return (*this)(0, 0);
}

Mat Mat::dagger() const {
    Mat m(*ctx_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) {
            const Scalar& s = (*this)(i, j);
            if (!s.is_zero()) m.at(j, i) = s.is_rational() ? s : s.conj();
        }
    return m;
}

Mat Mat::transpose() const {
    Mat m(*ctx_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) m.at(j, i) = (*this)(i, j);
    return m;
}

Scalar Mat::trace() const {
    if (!is_square()) throw Error(ErrorCode::ShapeMismatch, "trace of " + shape(*this));
    Scalar t(*ctx_);
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

Mat Mat::pow(int e) const {
    if (!is_square()) throw Error(ErrorCode::ShapeMismatch, "power of " + shape(*this));
    if (e < 0) throw Error(ErrorCode::ShapeMismatch, "negative matrix power");
    Mat result = identity(*ctx_, rows_), base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

Mat Mat::block(int r0, int c0, int nr, int nc) const {
    if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_)
        throw Error(ErrorCode::ShapeMismatch, "block out of range of " + shape(*this));
    Mat m(*ctx_, nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) m.at(i, j) = (*this)(r0 + i, c0 + j);
    return m;
}

void Mat::set_block(int r0, int c0, const Mat& b) {
    check_ctx(b);
    if (r0 < 0 || c0 < 0 || r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_)
        throw Error(ErrorCode::ShapeMismatch, "block " + shape(b) + " does not fit in " + shape(*this));
    for (int i = 0; i < b.rows_; ++i)
        for (int j = 0; j < b.cols_; ++j) at(r0 + i, c0 + j) = b(i, j);
}

Mat operator+(const Mat& a, const Mat& b) {
    Mat r = a;
    r += b;
    return r;
}

Mat& Mat::operator+=(const Mat& b) {
    check_ctx(b);
    if (rows_ != b.rows_ || cols_ != b.cols_) throw Error(ErrorCode::ShapeMismatch, shape(*this) + " + " + shape(b));
    for (std::size_t k = 0; k < e_.size(); ++k)
        if (!b.e_[k].is_zero()) e_[k] += b.e_[k];
    return *this;
}

Mat Mat::operator-() const {
    Mat r(*ctx_, rows_, cols_);
    for (std::size_t k = 0; k < e_.size(); ++k)
        if (!e_[k].is_zero()) r.e_[k] = -e_[k];
    return r;
}

Mat operator-(const Mat& a, const Mat& b) { return a + (-b); }

Mat operator*(const Mat& a, const Mat& b) {
    a.check_ctx(b);
    if (a.cols_ != b.rows_) throw Error(ErrorCode::ShapeMismatch, shape(a) + " * " + shape(b));
    Mat r(*a.ctx_, a.rows_, b.cols_);
    // zero-skipping: most matrices here are monomial or block sparse
    for (int i = 0; i < a.rows_; ++i)
        for (int k = 0; k < a.cols_; ++k) {
            const Scalar& x = a(i, k);
            if (x.is_zero()) continue;
            const bool one = x.is_one();
            for (int j = 0; j < b.cols_; ++j) {
                const Scalar& y = b(k, j);
                if (y.is_zero()) continue;
                if (one)
                    r.at(i, j) += y;
                else
                    r.at(i, j) += x * y;
            }
        }
    return r;
}

Mat operator*(const Mat& a, const Scalar& s) {
    Mat r(*a.ctx_, a.rows_, a.cols_);
    if (s.is_zero()) return r;
    for (std::size_t k = 0; k < a.e_.size(); ++k)
        if (!a.e_[k].is_zero()) r.e_[k] = a.e_[k] * s;
    return r;
}

bool operator==(const Mat& a, const Mat& b) {
    return a.ctx_ == b.ctx_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
}

std::string Mat::to_string() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < rows_; ++i) {
        os << (i ? "; " : "");
        for (int j = 0; j < cols_; ++j) os << (j ? ", " : "") << (*this)(i, j).to_string();
    }
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------------------

Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.context(), a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const Scalar& x = a(i, j);
            if (x.is_zero()) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l) {
                    const Scalar& y = b(k, l);
                    if (!y.is_zero()) r.at(i * b.rows() + k, j * b.cols() + l) = x.is_one() ? y : x * y;
                }
        }
    return r;
}

Mat direct_sum(const std::vector<Mat>& blocks) {
    if (blocks.empty()) throw Error(ErrorCode::ShapeMismatch, "direct sum of nothing");
    int r = 0, c = 0;
    for (const auto& b : blocks) {
        r += b.rows();
        c += b.cols();
    }
    Mat m(blocks[0].context(), r, c);
    int i = 0, j = 0;
    for (const auto& b : blocks) {
        m.set_block(i, j, b);
        i += b.rows();
        j += b.cols();
    }
    return m;
}

Mat conjugate(const Mat& x, const Mat& a) { return x * a * x.dagger(); }

bool is_unitary(const Mat& m) {
    if (!m.is_square()) return false;
    return (m.dagger() * m).is_identity();
}

bool is_monomial(const Mat& m) {
    if (!m.is_square()) return false;
    std::vector<int> col_count(static_cast<std::size_t>(m.cols()), 0);
    for (int i = 0; i < m.rows(); ++i) {
        int row_count = 0;
        for (int j = 0; j < m.cols(); ++j)
            if (!m(i, j).is_zero()) {
                ++row_count;
                ++col_count[static_cast<std::size_t>(j)];
            }
        if (row_count != 1) return false;
    }
    for (int c : col_count)
        if (c != 1) return false;
    return true;
}

SpectralData spectral(const Mat& v, int p) {
    const FieldContext& ctx = v.context();
    if (!v.is_square()) throw Error(ErrorCode::NotOrderP, "non-square matrix " + shape(v));
    if (ctx.order() % p != 0) throw Error(ErrorCode::NotOrderP, "p does not divide the field order");
    const int n = v.rows();
    std::vector<Mat> powers{Mat::identity(ctx, n)};
    for (int j = 1; j <= p; ++j) powers.push_back(powers.back() * v);
    if (!powers[static_cast<std::size_t>(p)].is_identity()) throw Error(ErrorCode::NotOrderP, "V^p != I");
    if (!is_unitary(v)) throw Error(ErrorCode::NotOrderP, "V is not unitary");
    SpectralData sd;
    sd.p = p;
    const Rational inv_p(1, p);
    for (int k = 0; k < p; ++k) {
        Mat pk(ctx, n, n);
        for (int j = 0; j < p; ++j) pk += powers[static_cast<std::size_t>(j)] * Scalar::p_root(ctx, -static_cast<long>(k) * j);
        pk = pk * Scalar(ctx, inv_p);
        Scalar t = pk.trace();
        if (!t.is_rational() || !t.rational_part().is_integer() || t.rational_part().sign() < 0)
            throw Error(ErrorCode::NotOrderP, "non-integral eigenvalue multiplicity");
        sd.multiplicities.push_back(static_cast<int>(*t.rational_part().to_int64()));
        sd.projections.push_back(std::move(pk));
    }
    return sd;
}

std::vector<int> p_diagonal_exponents(const Mat& d) {
    if (!d.is_diagonal()) throw Error(ErrorCode::NotOrderP, "matrix is not diagonal");
    std::vector<int> out;
    for (const auto& s : d.diagonal()) {
        auto k = s.p_root_exponent();
        if (!k) throw Error(ErrorCode::NotOrderP, "diagonal entry " + s.to_string() + " is not a p-th root of unity");
        out.push_back(*k);
    }
    return out;
}

std::vector<int> exponent_counts(const std::vector<int>& exps, int p) {
    std::vector<int> c(static_cast<std::size_t>(p), 0);
    for (int e : exps) ++c[static_cast<std::size_t>(((e % p) + p) % p)];
    return c;
}

Mat match_diagonals(const Mat& d1, const Mat& d2, int p) {
    auto e1 = p_diagonal_exponents(d1);
    auto e2 = p_diagonal_exponents(d2);
    auto c1 = exponent_counts(e1, p), c2 = exponent_counts(e2, p);
    if (e1.size() != e2.size() || c1 != c2) {
        auto str = [](const std::vector<int>& v) {
            std::string s = "(";
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
            return s + ")";
        };
        throw Error(ErrorCode::MultisetMismatch, "eigenvalue multiplicities " + str(c1) + " vs " + str(c2));
    }
    // Q e_j = e_{pi(j)} gives (Q^dagger D1 Q)_jj = D1_{pi(j)}
    std::vector<int> pi(e2.size(), -1);
    std::vector<bool> used(e1.size(), false);
    for (std::size_t j = 0; j < e2.size(); ++j) {
        for (std::size_t i = 0; i < e1.size(); ++i) {
            if (!used[i] && e1[i] == e2[j]) {
                used[i] = true;
                pi[j] = static_cast<int>(i);
                break;
            }
        }
    }
    return Mat::permutation(d1.context(), pi);
}

// ---------------------------------------------------------------------------

namespace {

struct Rref {
    Mat m;                  // reduced augmented matrix
    std::vector<int> pivots;  // pivot column per pivot row
};

// Gauss-Jordan over the first `ncols` columns of m.
Rref reduce(Mat m, int ncols) {
    const FieldContext& ctx = m.context();
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < ncols && row < m.rows(); ++col) {
        int piv = -1;
        for (int r = row; r < m.rows(); ++r)
            if (!m(r, col).is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != row)
            for (int j = 0; j < m.cols(); ++j) std::swap(m.at(piv, j), m.at(row, j));
        Scalar inv = m(row, col).inv();
        if (!inv.is_one())
            for (int j = 0; j < m.cols(); ++j)
                if (!m(row, j).is_zero()) m.at(row, j) = m(row, j) * inv;
        std::vector<int> nz;
        for (int j = 0; j < m.cols(); ++j)
            if (!m(row, j).is_zero()) nz.push_back(j);
        for (int r = 0; r < m.rows(); ++r) {
            if (r == row || m(r, col).is_zero()) continue;
            Scalar f = m(r, col);
            for (int j : nz) m.at(r, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    (void)ctx;
    return {std::move(m), std::move(pivots)};
}

}  // namespace

Solution solve(const Mat& a, const Mat& rhs) {
    if (a.rows() != rhs.rows()) throw Error(ErrorCode::ShapeMismatch, shape(a) + " system with rhs " + shape(rhs));
    const FieldContext& ctx = a.context();
    const int n = a.cols(), c = rhs.cols();
    Mat aug(ctx, a.rows(), n + c);
    aug.set_block(0, 0, a);
    aug.set_block(0, n, rhs);
    auto [m, pivots] = reduce(std::move(aug), n);
    const int rank = static_cast<int>(pivots.size());
    for (int r = rank; r < m.rows(); ++r)
        for (int j = n; j < n + c; ++j)
            if (!m(r, j).is_zero()) throw Error(ErrorCode::Inconsistent, "row " + std::to_string(r) + " reduces to 0 = nonzero");
    Solution s{Mat(ctx, n, c), {}};
    for (int r = 0; r < rank; ++r)
        for (int j = 0; j < c; ++j) s.particular.at(pivots[static_cast<std::size_t>(r)], j) = m(r, n + j);
    std::vector<bool> is_pivot(static_cast<std::size_t>(n), false);
    for (int pc : pivots) is_pivot[static_cast<std::size_t>(pc)] = true;
    for (int f = 0; f < n; ++f) {
        if (is_pivot[static_cast<std::size_t>(f)]) continue;
        Mat v(ctx, n, 1);
        v.at(f, 0) = Scalar::one(ctx);
        for (int r = 0; r < rank; ++r)
            if (!m(r, f).is_zero()) v.at(pivots[static_cast<std::size_t>(r)], 0) = -m(r, f);
        s.null_basis.push_back(std::move(v));
    }
    return s;
}

std::vector<Mat> null_space(const Mat& a) { return solve(a, Mat(a.context(), a.rows(), 1)).null_basis; }

int rank(const Mat& a) { return static_cast<int>(reduce(a, a.cols()).pivots.size()); }

Mat vec(const Mat& m) {
    Mat v(m.context(), m.rows() * m.cols(), 1);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) v.at(i * m.cols() + j, 0) = m(i, j);
    return v;
}

Mat unvec(const Mat& v, int rows, int cols) {
    if (v.rows() != rows * cols || v.cols() != 1) throw Error(ErrorCode::ShapeMismatch, "unvec of " + shape(v));
    Mat m(v.context(), rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m.at(i, j) = v(i * cols + j, 0);
    return m;
}

Mat fourier_matrix(const FieldContext& ctx) {
    auto c = fourier_normalizer(ctx);
    if (!c)
        throw Error(ErrorCode::NonDiagonalizableWithinField,
                    "Q(zeta_" + std::to_string(ctx.order()) + ") has no element of modulus 1/sqrt(p); use a field order divisible by 4");
    const int p = ctx.p();
    Mat f(ctx, p, p);
    for (int j = 0; j < p; ++j)
        for (int r = 0; r < p; ++r) f.at(j, r) = Scalar::p_root(ctx, static_cast<long>(r) * j) * *c;
    return f;
}

Mat cyclic_shift(const FieldContext& ctx, int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) perm[static_cast<std::size_t>(j)] = (j + 1) % n;
    return Mat::permutation(ctx, perm);
}

}  // namespace afzp
