#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cdprep {

using cplx = std::complex<double>;

/// An L-site Pauli string in symplectic (bitmask) form: bit i of `x` flags an
/// X factor on site i, bit i of `z` a Z factor.  Letter codes per site:
/// I=(0,0), X=(1,0), Z=(0,1), Y=(1,1).  The canonical (Hermitian) string is
/// P(x,z) = i^{|x&z|} X^x Z^z, so Y = iXZ site-wise.  Coefficients live in
/// PauliSum; a PauliString is phase-free.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  int size = 0;

  static PauliString identity(int length);
  /// Leftmost label character is site 0.
  static PauliString from_label(std::string_view label);
  static PauliString single(int length, int site, char letter);

  char letter(int site) const;
  std::string label() const;
  int weight() const;
  int y_count() const;

  bool operator==(const PauliString&) const = default;
};

struct PauliStringLess {
  bool operator()(const PauliString& a, const PauliString& b) const {
    if (a.x != b.x) return a.x < b.x;
    return a.z < b.z;
  }
};

/// a·b = phase·c with phase in {1, i, -1, -i}.  Throws on length mismatch.
std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b);

/// True iff the strings commute (symplectic form is even).
bool commutes(const PauliString& a, const PauliString& b);

/// Sparse weighted sum of Pauli strings over a fixed number of sites.
/// Coefficients with magnitude below the prune threshold are dropped after
/// every arithmetic operation, keeping sums in canonical sparse form.
class PauliSum {
 public:
  static constexpr double kPruneThreshold = 1e-14;

  using TermMap = std::map<PauliString, cplx, PauliStringLess>;

  explicit PauliSum(int length);
  PauliSum(int length, std::initializer_list<std::pair<std::string_view, cplx>> terms);

  int size() const { return size_; }
  const TermMap& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  cplx coefficient(const PauliString& p) const;
  void add(const PauliString& p, cplx coeff);
  void add(std::string_view label, cplx coeff);

  PauliSum& operator+=(const PauliSum& rhs);
  PauliSum& operator-=(const PauliSum& rhs);
  PauliSum& operator*=(cplx scale);

  PauliSum dagger() const;
  bool is_hermitian(double tol = 1e-12) const;
  double max_abs_coefficient() const;

 private:
  int size_;
  TermMap terms_;
};

PauliSum operator+(PauliSum lhs, const PauliSum& rhs);
PauliSum operator-(PauliSum lhs, const PauliSum& rhs);
PauliSum operator*(PauliSum lhs, cplx scale);
PauliSum operator*(cplx scale, PauliSum rhs);
/// Full operator product, expanding string-by-string.
PauliSum operator*(const PauliSum& lhs, const PauliSum& rhs);

/// [a, b] = ab - ba.  Exploits that Pauli strings either commute or
/// anticommute, so only anticommuting pairs contribute 2·ab.
PauliSum commutator(const PauliSum& a, const PauliSum& b);

/// Normalized Hilbert-Schmidt inner product 2^{-L} tr(a† b).  Distinct
/// strings are orthogonal, so this reduces to a sparse coefficient sum.
cplx hs_inner(const PauliSum& a, const PauliSum& b);

/// Dense 2^L x 2^L matrix.  Guarded by a site limit; memory is 2^{2L+4} bytes.
Eigen::MatrixXcd to_dense(const PauliSum& a, int dense_site_limit = 10);

/// JSON object {"L": int, "terms": [{"string": "IZXY...", "re": f, "im": f}]}
/// with terms in canonical order, used for golden files.
std::string to_json_string(const PauliSum& a);
PauliSum pauli_sum_from_json(const std::string& text);

}  // namespace cdprep
