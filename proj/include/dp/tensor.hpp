#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dp/common.hpp"

namespace dp {

// Additive logit mask standing in for -inf; exp(x - max) underflows to exactly
// 0.0 for masked entries, so masked keys carry zero attention weight.
inline constexpr double kMaskLogit = -1e30;

// Dense row-major 2-D tensor of doubles with an optional gradient buffer.
// Copies are shallow: a Tensor is a handle onto shared storage, which is what
// lets tape closures accumulate gradients into the tensors the caller holds.
class Tensor {
 public:
  Tensor() = default;

  Tensor(int rows, int cols, bool requires_grad = false) {
    if (rows <= 0 || cols <= 0) throw ShapeError("tensor dims must be positive");
    s_ = std::make_shared<Storage>();
    s_->rows = rows;
    s_->cols = cols;
    s_->data.assign(static_cast<size_t>(rows) * cols, 0.0);
    s_->requires_grad = requires_grad;
    if (requires_grad) s_->grad.assign(s_->data.size(), 0.0);
  }

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }

  static Tensor full(int rows, int cols, double v) {
    Tensor t(rows, cols);
    std::fill(t.data(), t.data() + t.size(), v);
    return t;
  }

  static Tensor scalar(double v) { return full(1, 1, v); }

  static Tensor from(std::initializer_list<std::initializer_list<double>> rows_init) {
    const int r = static_cast<int>(rows_init.size());
    if (r == 0) throw ShapeError("from: empty init");
    const int c = static_cast<int>(rows_init.begin()->size());
    Tensor t(r, c);
    int i = 0;
    for (const auto& row : rows_init) {
      if (static_cast<int>(row.size()) != c) throw ShapeError("from: ragged init");
      int j = 0;
      for (double v : row) t.at(i, j++) = v;
      ++i;
    }
    return t;
  }

  static Tensor from_row(const std::vector<double>& v) {
    Tensor t(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), t.data());
    return t;
  }

  // A Tensor is a shallow handle: const applies to the handle, not the shared
  // storage, so accessors hand out mutable views even through const handles.
  bool defined() const { return s_ != nullptr; }
  int rows() const { return s_->rows; }
  int cols() const { return s_->cols; }
  size_t size() const { return s_->data.size(); }

  double* data() const { return s_->data.data(); }

  double& at(int r, int c) const {
    assert(r >= 0 && r < rows() && c >= 0 && c < cols());
    return s_->data[static_cast<size_t>(r) * cols() + c];
  }

  // value of a 1x1 tensor
  double value() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("value: tensor is not scalar");
    return s_->data[0];
  }

  bool requires_grad() const { return s_ && s_->requires_grad; }

  void set_requires_grad(bool rg) const {
    s_->requires_grad = rg;
    if (rg && s_->grad.size() != s_->data.size()) s_->grad.assign(s_->data.size(), 0.0);
    if (!rg) s_->grad.clear();
  }

  double* grad() const {
    assert(requires_grad());
    return s_->grad.data();
  }
  double grad_at(int r, int c) const { return grad()[static_cast<size_t>(r) * cols() + c]; }

  void zero_grad() const {
    if (requires_grad()) std::fill(s_->grad.begin(), s_->grad.end(), 0.0);
  }

  bool same_storage(const Tensor& o) const { return s_ == o.s_; }

  bool all_finite() const {
    for (double v : s_->data)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  struct Storage {
    int rows = 0, cols = 0;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> s_;
};

// Ordered record of executed differentiable ops. Replaying in reverse visits
// each op exactly once; closures accumulate (+=) into input grads so fan-out
// adds up. Single-use per forward pass: backward() clears it.
class Tape {
 public:
  static Tape& get() {
    thread_local Tape tape;
    return tape;
  }

  bool recording() const { return recording_; }
  void set_recording(bool r) { recording_ = r; }

  void record(std::function<void()> fn) { entries_.push_back(std::move(fn)); }

  size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  void replay_reverse_and_clear() {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    clear();
  }

 private:
  std::vector<std::function<void()>> entries_;
  bool recording_ = true;
};

// Disables tape recording for its scope (inference / finite differences).
class NoGradGuard {
 public:
  NoGradGuard() : prev_(Tape::get().recording()) { Tape::get().set_recording(false); }
  ~NoGradGuard() { Tape::get().set_recording(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

namespace detail {

inline bool trace(const Tensor& a) { return Tape::get().recording() && a.requires_grad(); }
inline bool trace(const Tensor& a, const Tensor& b) {
  return Tape::get().recording() && (a.requires_grad() || b.requires_grad());
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Differentiable ops. Each op computes forward values eagerly and, when any
// input requires grad, records a reverse closure on the thread's tape.
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions disagree");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c(m, n, detail::trace(a, b));
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<size_t>(i) * k;
    double* crow = pc + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = pb + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  if (c.requires_grad()) {
    Tape::get().record([a, b, c]() {
      const int m = a.rows(), k = a.cols(), n = b.cols();
      const double* gc = c.grad();
      if (a.requires_grad()) {
        double* ga = a.grad();
        const double* pb = b.data();
        for (int i = 0; i < m; ++i)
          for (int kk = 0; kk < k; ++kk) {
            double acc = 0.0;
            const double* brow = pb + static_cast<size_t>(kk) * n;
            const double* gcrow = gc + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) acc += gcrow[j] * brow[j];
            ga[static_cast<size_t>(i) * k + kk] += acc;
          }
      }
      if (b.requires_grad()) {
        double* gb = b.grad();
        const double* pa = a.data();
        for (int kk = 0; kk < k; ++kk)
          for (int i = 0; i < m; ++i) {
            const double av = pa[static_cast<size_t>(i) * k + kk];
            if (av == 0.0) continue;
            const double* gcrow = gc + static_cast<size_t>(i) * n;
            double* gbrow = gb + static_cast<size_t>(kk) * n;
            for (int j = 0; j < n; ++j) gbrow[j] += av * gcrow[j];
          }
      }
    });
  }
  return c;
}

inline Tensor transpose(const Tensor& x) {
  Tensor y(x.cols(), x.rows(), detail::trace(x));
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) y.at(j, i) = x.at(i, j);
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j)
          gx[static_cast<size_t>(i) * x.cols() + j] += gy[static_cast<size_t>(j) * y.cols() + i];
    });
  }
  return y;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  Tensor c(a.rows(), a.cols(), detail::trace(a, b));
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
  if (c.requires_grad()) {
    Tape::get().record([a, b, c]() {
      const double* gc = c.grad();
      if (a.requires_grad()) {
        double* ga = a.grad();
        for (size_t i = 0; i < c.size(); ++i) ga[i] += gc[i];
      }
      if (b.requires_grad()) {
        double* gb = b.grad();
        for (size_t i = 0; i < c.size(); ++i) gb[i] += gc[i];
      }
    });
  }
  return c;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  Tensor c(a.rows(), a.cols(), detail::trace(a, b));
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  if (c.requires_grad()) {
    Tape::get().record([a, b, c]() {
      const double* gc = c.grad();
      if (a.requires_grad()) {
        double* ga = a.grad();
        for (size_t i = 0; i < c.size(); ++i) ga[i] += gc[i];
      }
      if (b.requires_grad()) {
        double* gb = b.grad();
        for (size_t i = 0; i < c.size(); ++i) gb[i] -= gc[i];
      }
    });
  }
  return c;
}

// elementwise (Hadamard) product
inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "mul");
  Tensor c(a.rows(), a.cols(), detail::trace(a, b));
  for (size_t i = 0; i < c.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  if (c.requires_grad()) {
    Tape::get().record([a, b, c]() {
      const double* gc = c.grad();
      if (a.requires_grad()) {
        double* ga = a.grad();
        for (size_t i = 0; i < c.size(); ++i) ga[i] += gc[i] * b.data()[i];
      }
      if (b.requires_grad()) {
        double* gb = b.grad();
        for (size_t i = 0; i < c.size(); ++i) gb[i] += gc[i] * a.data()[i];
      }
    });
  }
  return c;
}

inline Tensor scale(const Tensor& x, double k) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (size_t i = 0; i < y.size(); ++i) y.data()[i] = k * x.data()[i];
  if (y.requires_grad()) {
    Tape::get().record([x, y, k]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i) gx[i] += k * gy[i];
    });
  }
  return y;
}

inline Tensor neg(const Tensor& x) { return scale(x, -1.0); }

inline Tensor add_const(const Tensor& x, double k) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (size_t i = 0; i < y.size(); ++i) y.data()[i] = x.data()[i] + k;
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

inline Tensor tanh(const Tensor& x) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (size_t i = 0; i < y.size(); ++i) y.data()[i] = std::tanh(x.data()[i]);
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i) {
        const double t = y.data()[i];
        gx[i] += gy[i] * (1.0 - t * t);
      }
    });
  }
  return y;
}

// elementwise natural log; domain x > 0
inline Tensor log(const Tensor& x) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (size_t i = 0; i < y.size(); ++i) y.data()[i] = std::log(x.data()[i]);
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i)
        if (gy[i] != 0.0) gx[i] += gy[i] / x.data()[i];
    });
  }
  return y;
}

inline Tensor pow_const(const Tensor& x, double p) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (size_t i = 0; i < y.size(); ++i) y.data()[i] = std::pow(x.data()[i], p);
  if (y.requires_grad()) {
    Tape::get().record([x, y, p]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i)
        if (gy[i] != 0.0) gx[i] += gy[i] * p * std::pow(x.data()[i], p - 1.0);
    });
  }
  return y;
}

// clamp to [lo, hi]; gradient passes through strictly inside the interval
inline Tensor clamp(const Tensor& x, double lo, double hi) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (size_t i = 0; i < y.size(); ++i) y.data()[i] = std::min(hi, std::max(lo, x.data()[i]));
  if (y.requires_grad()) {
    Tape::get().record([x, y, lo, hi]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i) {
        const double v = x.data()[i];
        if (v > lo && v < hi) gx[i] += gy[i];
      }
    });
  }
  return y;
}

inline Tensor sum_all(const Tensor& x) {
  Tensor y(1, 1, detail::trace(x));
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x.data()[i];
  y.data()[0] = acc;
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double g = y.grad()[0];
      for (size_t i = 0; i < x.size(); ++i) gx[i] += g;
    });
  }
  return y;
}

inline Tensor mean_all(const Tensor& x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(x.size()));
}

// X[m x n] + b broadcast over rows; b is 1 x n
inline Tensor add_rowvec(const Tensor& x, const Tensor& b) {
  if (b.rows() != 1 || b.cols() != x.cols()) throw ShapeError("add_rowvec: bias must be 1 x cols");
  Tensor y(x.rows(), x.cols(), detail::trace(x, b));
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) y.at(i, j) = x.at(i, j) + b.at(0, j);
  if (y.requires_grad()) {
    Tape::get().record([x, b, y]() {
      const double* gy = y.grad();
      if (x.requires_grad()) {
        double* gx = x.grad();
        for (size_t i = 0; i < y.size(); ++i) gx[i] += gy[i];
      }
      if (b.requires_grad()) {
        double* gb = b.grad();
        for (int i = 0; i < y.rows(); ++i)
          for (int j = 0; j < y.cols(); ++j) gb[j] += gy[static_cast<size_t>(i) * y.cols() + j];
      }
    });
  }
  return y;
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const int cols = parts[0].cols();
  int rows = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
    rg = rg || p.requires_grad();
  }
  Tensor y(rows, cols, Tape::get().recording() && rg);
  int r0 = 0;
  for (const auto& p : parts) {
    std::copy(p.data(), p.data() + p.size(), y.data() + static_cast<size_t>(r0) * cols);
    r0 += p.rows();
  }
  if (y.requires_grad()) {
    Tape::get().record([parts, y]() {
      const double* gy = y.grad();
      int r0 = 0;
      for (auto& p : parts) {
        if (p.requires_grad()) {
          double* gp = p.grad();
          const size_t len = p.size();
          const double* src = gy + static_cast<size_t>(r0) * p.cols();
          for (size_t i = 0; i < len; ++i) gp[i] += src[i];
        }
        r0 += p.rows();
      }
    });
  }
  return y;
}

inline Tensor slice_rows(const Tensor& x, int first, int count) {
  if (first < 0 || count <= 0 || first + count > x.rows())
    throw ShapeError("slice_rows: range out of bounds");
  Tensor y(count, x.cols(), detail::trace(x));
  std::copy(x.data() + static_cast<size_t>(first) * x.cols(),
            x.data() + static_cast<size_t>(first + count) * x.cols(), y.data());
  if (y.requires_grad()) {
    Tape::get().record([x, y, first]() {
      double* gx = x.grad() + static_cast<size_t>(first) * x.cols();
      const double* gy = y.grad();
      for (size_t i = 0; i < y.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

inline Tensor select(const Tensor& x, int r, int c) {
  if (r < 0 || r >= x.rows() || c < 0 || c >= x.cols())
    throw ShapeError("select: index out of bounds");
  Tensor y(1, 1, detail::trace(x));
  y.data()[0] = x.at(r, c);
  if (y.requires_grad()) {
    Tape::get().record([x, y, r, c]() {
      x.grad()[static_cast<size_t>(r) * x.cols() + c] += y.grad()[0];
    });
  }
  return y;
}

// weighted sum of selected rows: sum_i w[i] * X[rows[i], :]  ->  1 x cols
inline Tensor rows_weighted_sum(const Tensor& x, const std::vector<int>& rows,
                                const std::vector<double>& w) {
  if (rows.size() != w.size() || rows.empty())
    throw ShapeError("rows_weighted_sum: index/weight mismatch");
  for (int r : rows)
    if (r < 0 || r >= x.rows()) throw ShapeError("rows_weighted_sum: row out of bounds");
  Tensor y(1, x.cols(), detail::trace(x));
  for (size_t i = 0; i < rows.size(); ++i) {
    const double* src = x.data() + static_cast<size_t>(rows[i]) * x.cols();
    for (int j = 0; j < x.cols(); ++j) y.data()[j] += w[i] * src[j];
  }
  if (y.requires_grad()) {
    Tape::get().record([x, y, rows, w]() {
      const double* gy = y.grad();
      for (size_t i = 0; i < rows.size(); ++i) {
        double* dst = x.grad() + static_cast<size_t>(rows[i]) * x.cols();
        for (int j = 0; j < x.cols(); ++j) dst[j] += w[i] * gy[j];
      }
    });
  }
  return y;
}

inline Tensor reshape(const Tensor& x, int rows, int cols) {
  if (static_cast<size_t>(rows) * cols != x.size()) throw ShapeError("reshape: size mismatch");
  Tensor y(rows, cols, detail::trace(x));
  std::copy(x.data(), x.data() + x.size(), y.data());
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (size_t i = 0; i < x.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

// row-wise softmax with max subtraction; each output row sums to 1
inline Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (int i = 0; i < x.rows(); ++i) {
    const double* xr = x.data() + static_cast<size_t>(i) * x.cols();
    double* yr = y.data() + static_cast<size_t>(i) * x.cols();
    double mx = xr[0];
    for (int j = 1; j < x.cols(); ++j) mx = std::max(mx, xr[j]);
    double denom = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
      yr[j] = std::exp(xr[j] - mx);
      denom += yr[j];
    }
    for (int j = 0; j < x.cols(); ++j) yr[j] /= denom;
  }
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (int i = 0; i < y.rows(); ++i) {
        const double* yr = y.data() + static_cast<size_t>(i) * y.cols();
        const double* gyr = gy + static_cast<size_t>(i) * y.cols();
        double dot = 0.0;
        for (int j = 0; j < y.cols(); ++j) dot += gyr[j] * yr[j];
        double* gxr = gx + static_cast<size_t>(i) * y.cols();
        for (int j = 0; j < y.cols(); ++j) gxr[j] += yr[j] * (gyr[j] - dot);
      }
    });
  }
  return y;
}

// row-wise log softmax: x - max - log(sum exp(x - max))
inline Tensor log_softmax_rows(const Tensor& x) {
  Tensor y(x.rows(), x.cols(), detail::trace(x));
  for (int i = 0; i < x.rows(); ++i) {
    const double* xr = x.data() + static_cast<size_t>(i) * x.cols();
    double* yr = y.data() + static_cast<size_t>(i) * x.cols();
    double mx = xr[0];
    for (int j = 1; j < x.cols(); ++j) mx = std::max(mx, xr[j]);
    double denom = 0.0;
    for (int j = 0; j < x.cols(); ++j) denom += std::exp(xr[j] - mx);
    const double lse = mx + std::log(denom);
    for (int j = 0; j < x.cols(); ++j) yr[j] = xr[j] - lse;
  }
  if (y.requires_grad()) {
    Tape::get().record([x, y]() {
      double* gx = x.grad();
      const double* gy = y.grad();
      for (int i = 0; i < y.rows(); ++i) {
        const double* yr = y.data() + static_cast<size_t>(i) * y.cols();
        const double* gyr = gy + static_cast<size_t>(i) * y.cols();
        double gsum = 0.0;
        for (int j = 0; j < y.cols(); ++j) gsum += gyr[j];
        double* gxr = gx + static_cast<size_t>(i) * y.cols();
        for (int j = 0; j < y.cols(); ++j) gxr[j] += gyr[j] - std::exp(yr[j]) * gsum;
      }
    });
  }
  return y;
}

// softmax(Q K^T / sqrt(d)) V with optional key mask. Masked keys get kMaskLogit
// added to their logits and thus exactly zero weight.
inline Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                   const std::vector<bool>* key_mask = nullptr) {
  if (q.cols() != k.cols()) throw ShapeError("attention: Q/K feature dims disagree");
  if (k.rows() != v.rows()) throw ShapeError("attention: K/V row counts disagree");
  if (key_mask) {
    if (static_cast<int>(key_mask->size()) != k.rows())
      throw ShapeError("attention: mask length mismatch");
    bool any = false;
    for (bool m : *key_mask) any = any || m;
    if (!any) throw std::runtime_error("empty attention support");
  }
  Tensor logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(q.cols())));
  if (key_mask) {
    bool any_masked = false;
    for (bool m : *key_mask) any_masked = any_masked || !m;
    if (any_masked) {
      Tensor m(q.rows(), k.rows());
      for (int i = 0; i < q.rows(); ++i)
        for (int j = 0; j < k.rows(); ++j)
          if (!(*key_mask)[j]) m.at(i, j) = kMaskLogit;
      logits = add(logits, m);
    }
  }
  return matmul(softmax_rows(logits), v);
}

// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. The tape is
// consumed either way; a loss with no taped graph just clears it.
inline void backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    Tape::get().clear();
    throw ShapeError("backward: loss must be a 1x1 scalar");
  }
  if (loss.requires_grad()) {
    loss.grad()[0] = 1.0;
    Tape::get().replay_reverse_and_clear();
  } else {
    Tape::get().clear();
  }
}

// Max over input coordinates of |analytic - central difference| scaled by
// max(1, |central difference|). The closure must map inputs to a 1x1 scalar.
inline double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                         std::vector<Tensor> inputs, double eps = 1e-5) {
  Tape::get().clear();
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tensor out = fn(inputs);
  backward(out);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (auto& t : inputs) analytic.emplace_back(t.grad(), t.grad() + t.size());

  double max_err = 0.0;
  NoGradGuard ng;
  for (size_t ti = 0; ti < inputs.size(); ++ti) {
    Tensor& t = inputs[ti];
    for (size_t i = 0; i < t.size(); ++i) {
      const double keep = t.data()[i];
      t.data()[i] = keep + eps;
      const double fp = fn(inputs).value();
      t.data()[i] = keep - eps;
      const double fm = fn(inputs).value();
      t.data()[i] = keep;
      const double num = (fp - fm) / (2.0 * eps);
      const double err = std::abs(analytic[ti][i] - num) / std::max(1.0, std::abs(num));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace dp
