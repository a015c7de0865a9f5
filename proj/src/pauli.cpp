#include "cdprep/pauli.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace cdprep {

namespace {

void check_length(int length) {
  if (length < 1 || length > 64)
    throw std::invalid_argument("Pauli string length must be in [1, 64], got " +
                                std::to_string(length));
}

void check_same_size(int a, int b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": size mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

constexpr cplx kPhaseTable[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // i^g

}  // namespace

PauliString PauliString::identity(int length) {
  check_length(length);
  return PauliString{0, 0, length};
}

PauliString PauliString::from_label(std::string_view label) {
  check_length(static_cast<int>(label.size()));
  PauliString p{0, 0, static_cast<int>(label.size())};
  for (int i = 0; i < p.size; ++i) {
    switch (label[i]) {
      case 'I': break;
      case 'X': p.x |= 1ull << i; break;
      case 'Z': p.z |= 1ull << i; break;
      case 'Y': p.x |= 1ull << i; p.z |= 1ull << i; break;
      default:
        throw std::invalid_argument("invalid Pauli letter '" + std::string(1, label[i]) + "'");
    }
  }
  return p;
}

PauliString PauliString::single(int length, int site, char letter) {
  check_length(length);
  if (site < 0 || site >= length)
    throw std::invalid_argument("site " + std::to_string(site) + " out of range for L=" +
                                std::to_string(length));
  PauliString p{0, 0, length};
  switch (letter) {
    case 'I': break;
    case 'X': p.x = 1ull << site; break;
    case 'Z': p.z = 1ull << site; break;
    case 'Y': p.x = p.z = 1ull << site; break;
    default:
      throw std::invalid_argument("invalid Pauli letter '" + std::string(1, letter) + "'");
  }
  return p;
}

char PauliString::letter(int site) const {
  const bool hx = (x >> site) & 1u;
  const bool hz = (z >> site) & 1u;
  if (hx && hz) return 'Y';
  if (hx) return 'X';
  if (hz) return 'Z';
  return 'I';
}

std::string PauliString::label() const {
  std::string s(static_cast<std::size_t>(size), 'I');
  for (int i = 0; i < size; ++i) s[i] = letter(i);
  return s;
}

int PauliString::weight() const { return std::popcount(x | z); }

int PauliString::y_count() const { return std::popcount(x & z); }

std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b) {
  check_same_size(a.size, b.size, "multiply");
  PauliString c{a.x ^ b.x, a.z ^ b.z, a.size};
  // Phase from P(x,z) = i^{|x&z|} X^x Z^z, commuting Z^{za} past X^{xb}.
  const int g = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) -
                std::popcount(c.x & c.z) + 2 * std::popcount(a.z & b.x);
  return {kPhaseTable[((g % 4) + 4) % 4], c};
}

bool commutes(const PauliString& a, const PauliString& b) {
  return ((std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1) == 0;
}

PauliSum::PauliSum(int length) : size_(length) { check_length(length); }

PauliSum::PauliSum(int length, std::initializer_list<std::pair<std::string_view, cplx>> terms)
    : size_(length) {
  check_length(length);
  for (const auto& [label, coeff] : terms) add(label, coeff);
}

cplx PauliSum::coefficient(const PauliString& p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? cplx{0, 0} : it->second;
}

void PauliSum::add(const PauliString& p, cplx coeff) {
  check_same_size(size_, p.size, "PauliSum::add");
  auto [it, inserted] = terms_.try_emplace(p, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) < kPruneThreshold) terms_.erase(it);
}

void PauliSum::add(std::string_view label, cplx coeff) {
  add(PauliString::from_label(label), coeff);
}

PauliSum& PauliSum::operator+=(const PauliSum& rhs) {
  check_same_size(size_, rhs.size_, "PauliSum::operator+=");
  for (const auto& [p, c] : rhs.terms_) add(p, c);
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& rhs) {
  check_same_size(size_, rhs.size_, "PauliSum::operator-=");
  for (const auto& [p, c] : rhs.terms_) add(p, -c);
  return *this;
}

PauliSum& PauliSum::operator*=(cplx scale) {
  if (std::abs(scale) < kPruneThreshold) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scale;
    it = std::abs(it->second) < kPruneThreshold ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

PauliSum PauliSum::dagger() const {
  PauliSum out(size_);
  for (const auto& [p, c] : terms_) out.add(p, std::conj(c));
  return out;
}

bool PauliSum::is_hermitian(double tol) const {
  for (const auto& [p, c] : terms_)
    if (std::abs(c.imag()) > tol) return false;
  return true;
}

double PauliSum::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [p, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

PauliSum operator+(PauliSum lhs, const PauliSum& rhs) { return lhs += rhs; }
PauliSum operator-(PauliSum lhs, const PauliSum& rhs) { return lhs -= rhs; }
PauliSum operator*(PauliSum lhs, cplx scale) { return lhs *= scale; }
PauliSum operator*(cplx scale, PauliSum rhs) { return rhs *= scale; }

PauliSum operator*(const PauliSum& lhs, const PauliSum& rhs) {
  check_same_size(lhs.size(), rhs.size(), "PauliSum product");
  PauliSum out(lhs.size());
  for (const auto& [pa, ca] : lhs.terms())
    for (const auto& [pb, cb] : rhs.terms()) {
      auto [phase, pc] = multiply(pa, pb);
      out.add(pc, phase * ca * cb);
    }
  return out;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  check_same_size(a.size(), b.size(), "commutator");
  PauliSum out(a.size());
  for (const auto& [pa, ca] : a.terms())
    for (const auto& [pb, cb] : b.terms()) {
      if (commutes(pa, pb)) continue;
      auto [phase, pc] = multiply(pa, pb);
      out.add(pc, 2.0 * phase * ca * cb);
    }
  return out;
}

cplx hs_inner(const PauliSum& a, const PauliSum& b) {
  check_same_size(a.size(), b.size(), "hs_inner");
  const PauliSum* small = &a;
  const PauliSum* large = &b;
  bool swapped = false;
  if (small->term_count() > large->term_count()) {
    std::swap(small, large);
    swapped = true;
  }
  cplx acc{0, 0};
  for (const auto& [p, c] : small->terms()) {
    const cplx other = large->coefficient(p);
    acc += swapped ? std::conj(other) * c : std::conj(c) * other;
  }
  return acc;
}

Eigen::MatrixXcd to_dense(const PauliSum& a, int dense_site_limit) {
  if (a.size() > dense_site_limit)
    throw std::domain_error("to_dense: L=" + std::to_string(a.size()) +
                            " exceeds dense limit " + std::to_string(dense_site_limit));
  const std::uint64_t dim = 1ull << a.size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& [p, c] : a.terms()) {
    const cplx base = kPhaseTable[p.y_count() % 4] * c;
    for (std::uint64_t col = 0; col < dim; ++col) {
      const double sign = (std::popcount(p.z & col) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(col ^ p.x), static_cast<Eigen::Index>(col)) += sign * base;
    }
  }
  return m;
}

std::string to_json_string(const PauliSum& a) {
  nlohmann::json j;
  j["L"] = a.size();
  j["terms"] = nlohmann::json::array();
  for (const auto& [p, c] : a.terms())
    j["terms"].push_back({{"string", p.label()}, {"re", c.real()}, {"im", c.imag()}});
  return j.dump(2);
}

PauliSum pauli_sum_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PauliSum out(j.at("L").get<int>());
  for (const auto& t : j.at("terms"))
    out.add(t.at("string").get<std::string>(),
            cplx{t.at("re").get<double>(), t.at("im").get<double>()});
  return out;
}

}  // namespace cdprep
