#pragma once

// Disk-array layouts as linear redundancy structures over GF(2).
//
// Every stored symbol is a GF(2) combination of the data symbols: a data
// symbol is a unit vector, a replica is a parity equation of arity one and an
// XOR parity has arity two or more. A failure set is survivable exactly when
// the symbols left on the surviving disks span all data columns.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/gf2.hpp"
#include "mirrorlab/rational.hpp"

namespace mirrorlab {

enum class LayoutKind { bm, nway, grd, id, cd, lsi, sspiral443, weaver, weaver_pds, bcode6, raidk, custom };

inline std::string_view kind_name(LayoutKind k) {
  switch (k) {
    case LayoutKind::bm: return "bm";
    case LayoutKind::nway: return "nway";
    case LayoutKind::grd: return "grd";
    case LayoutKind::id: return "id";
    case LayoutKind::cd: return "cd";
    case LayoutKind::lsi: return "lsi";
    case LayoutKind::sspiral443: return "sspiral";
    case LayoutKind::weaver: return "weaver";
    case LayoutKind::weaver_pds: return "weaver-pds";
    case LayoutKind::bcode6: return "bcode";
    case LayoutKind::raidk: return "raidk";
    case LayoutKind::custom: return "custom";
  }
  return "custom";
}

// Kind plus its single integer parameter: replication degree n for nway,
// cluster count c for id, parity degree t for weaver, fault tolerance k for
// raidk. Unused otherwise.
struct LayoutSpec {
  LayoutKind kind = LayoutKind::bm;
  int disks = 0;
  int param = 0;

  friend bool operator==(const LayoutSpec&, const LayoutSpec&) = default;
};

// Short name used by the CLI and tables: raid5..raid8 map to raidk.
inline std::string display_name(const LayoutSpec& s) {
  if (s.kind == LayoutKind::raidk && s.param >= 1 && s.param <= 4) {
    return "raid" + std::to_string(4 + s.param);
  }
  return std::string(kind_name(s.kind));
}

// Parses a layout name. `param` overrides the default parameter when given.
inline LayoutSpec parse_layout_spec(std::string_view name, int disks,
                                    std::optional<int> param = std::nullopt) {
  static const std::map<std::string, std::pair<LayoutKind, int>, std::less<>> table = {
      {"bm", {LayoutKind::bm, 2}},          {"raid10", {LayoutKind::bm, 2}},
      {"nway", {LayoutKind::nway, 3}},      {"grd", {LayoutKind::grd, 0}},
      {"raid01", {LayoutKind::grd, 0}},     {"id", {LayoutKind::id, 2}},
      {"cd", {LayoutKind::cd, 0}},          {"lsi", {LayoutKind::lsi, 0}},
      {"sspiral", {LayoutKind::sspiral443, 3}}, {"ssp", {LayoutKind::sspiral443, 3}},
      {"weaver", {LayoutKind::weaver, 3}},  {"weaver-pds", {LayoutKind::weaver_pds, 3}},
      {"bcode", {LayoutKind::bcode6, 0}},
      {"raidk", {LayoutKind::raidk, 1}},    {"raid5", {LayoutKind::raidk, 1}},
      {"raid6", {LayoutKind::raidk, 2}},    {"raid7", {LayoutKind::raidk, 3}},
      {"raid8", {LayoutKind::raidk, 4}},    {"r8", {LayoutKind::raidk, 4}},
  };
  auto it = table.find(name);
  if (it == table.end()) {
    throw ValidationError("layout", "unknown layout kind '" + std::string(name) + "'");
  }
  LayoutSpec spec{it->second.first, disks, it->second.second};
  const bool fixed_param = name.starts_with("raid") && name != "raidk" && name != "raid10" &&
                           name != "raid01";
  if (param && !fixed_param) spec.param = *param;
  return spec;
}

enum class SymbolRole { data, parity };

struct Symbol {
  int disk = 0;
  SymbolRole role = SymbolRole::data;
  std::string label;
};

// parity = XOR of data. A single data id makes the parity a replica.
struct ParityEquation {
  std::size_t parity = 0;
  std::vector<std::size_t> data;
};

// Set of failed disk indices, limited to 64 disks.
class FailureSet {
 public:
  FailureSet() = default;
  FailureSet(std::initializer_list<int> disks) {
    for (int d : disks) insert(d);
  }
  static FailureSet from_mask(std::uint64_t mask) {
    FailureSet f;
    f.mask_ = mask;
    return f;
  }

  void insert(int disk) {
    if (disk < 0 || disk >= 64) throw ConstraintError("disk index out of range");
    mask_ |= std::uint64_t{1} << disk;
  }
  bool contains(int disk) const { return (mask_ >> disk) & 1u; }
  int size() const { return std::popcount(mask_); }
  bool empty() const { return mask_ == 0; }
  std::uint64_t mask() const { return mask_; }
  std::vector<int> disks() const {
    std::vector<int> out;
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }
  bool subset_of(const FailureSet& o) const { return (mask_ & ~o.mask_) == 0; }

  friend bool operator==(const FailureSet&, const FailureSet&) = default;

 private:
  std::uint64_t mask_ = 0;
};

class Layout {
 public:
  // Validates the structure and derives the GF(2) vectors.
  Layout(LayoutSpec spec, std::vector<Symbol> symbols, std::vector<ParityEquation> equations)
      : spec_(spec), symbols_(std::move(symbols)), equations_(std::move(equations)) {
    validate_and_index();
  }

  const LayoutSpec& spec() const noexcept { return spec_; }
  LayoutKind kind() const noexcept { return spec_.kind; }
  int disks() const noexcept { return spec_.disks; }
  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
  const std::vector<ParityEquation>& equations() const noexcept { return equations_; }
  const std::vector<std::size_t>& data_symbols() const noexcept { return data_ids_; }
  std::size_t data_count() const noexcept { return data_ids_.size(); }
  const std::vector<std::size_t>& symbols_on(int disk) const { return by_disk_.at(disk); }

  // GF(2) vector of a stored symbol over the data columns.
  const gf2::BitVector& vector(std::size_t symbol) const { return vectors_.at(symbol); }
  // Column index of a data symbol.
  std::size_t column(std::size_t data_symbol) const { return column_.at(data_symbol); }
  // Equation that defines a parity symbol.
  const ParityEquation& equation_of(std::size_t parity_symbol) const {
    return equations_.at(equation_index_.at(parity_symbol));
  }

  // Upper bound on tolerable failures: losing more disks than this leaves
  // fewer stored symbols than data columns, whichever disks fail.
  int max_tolerable() const noexcept { return max_tolerable_; }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].label == label) return i;
    }
    return std::nullopt;
  }

 private:
  void validate_and_index() {
    const int n = spec_.disks;
    if (n < 1 || n > 64) throw ConstraintError("disk count must be in [1, 64]");
    by_disk_.assign(static_cast<std::size_t>(n), {});
    column_.assign(symbols_.size(), static_cast<std::size_t>(-1));
    std::set<std::string> labels;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      const Symbol& s = symbols_[i];
      if (s.disk < 0 || s.disk >= n) throw ConstraintError("symbol placed on a disk outside [0, N)");
      if (!labels.insert(s.label).second) throw ConstraintError("duplicate symbol label " + s.label);
      by_disk_[static_cast<std::size_t>(s.disk)].push_back(i);
      if (s.role == SymbolRole::data) {
        column_[i] = data_ids_.size();
        data_ids_.push_back(i);
      }
    }
    const std::size_t dim = data_ids_.size();
    vectors_.assign(symbols_.size(), gf2::BitVector(dim));
    for (std::size_t id : data_ids_) vectors_[id].set(column_[id]);

    equation_index_.assign(symbols_.size(), static_cast<std::size_t>(-1));
    for (std::size_t e = 0; e < equations_.size(); ++e) {
      const ParityEquation& eq = equations_[e];
      if (eq.parity >= symbols_.size() || symbols_[eq.parity].role != SymbolRole::parity) {
        throw ConstraintError("equation target is not a parity symbol");
      }
      if (equation_index_[eq.parity] != static_cast<std::size_t>(-1)) {
        throw ConstraintError("parity symbol defined twice: " + symbols_[eq.parity].label);
      }
      if (eq.data.empty()) throw ConstraintError("empty parity equation");
      std::set<std::size_t> seen;
      for (std::size_t d : eq.data) {
        if (d >= symbols_.size() || symbols_[d].role != SymbolRole::data) {
          throw ConstraintError("equation source is not a data symbol");
        }
        if (!seen.insert(d).second) throw ConstraintError("repeated data id in equation");
        vectors_[eq.parity].flip(column_[d]);
      }
      equation_index_[eq.parity] = e;
    }
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].role == SymbolRole::parity &&
          equation_index_[i] == static_cast<std::size_t>(-1)) {
        throw ConstraintError("parity symbol without equation: " + symbols_[i].label);
      }
    }

    std::vector<std::size_t> per_disk;
    for (const auto& ids : by_disk_) per_disk.push_back(ids.size());
    std::sort(per_disk.rbegin(), per_disk.rend());
    max_tolerable_ = 0;
    std::size_t kept = 0;
    for (std::size_t k = 0; k < per_disk.size(); ++k) kept += per_disk[k];
    // Drop the smallest disks one by one while the rest can still hold dim.
    for (int i = 1; i <= n; ++i) {
      kept -= per_disk[static_cast<std::size_t>(n - i)];
      if (kept < dim) break;
      max_tolerable_ = i;
    }
  }

  LayoutSpec spec_;
  std::vector<Symbol> symbols_;
  std::vector<ParityEquation> equations_;
  std::vector<std::size_t> data_ids_;
  std::vector<std::size_t> column_;
  std::vector<std::size_t> equation_index_;
  std::vector<std::vector<std::size_t>> by_disk_;
  std::vector<gf2::BitVector> vectors_;
  int max_tolerable_ = 0;
};

namespace detail {

class LayoutBuilder {
 public:
  explicit LayoutBuilder(LayoutSpec spec) : spec_(spec) {}

  std::size_t data(int disk, std::string label) {
    symbols_.push_back({disk, SymbolRole::data, std::move(label)});
    return symbols_.size() - 1;
  }

  std::size_t parity(int disk, std::vector<std::size_t> sources, std::string label = {}) {
    if (label.empty()) {
      if (sources.size() == 1) {
        label = symbols_[sources.front()].label + "'";
        while (taken(label)) label += "'";
      } else {
        label = "p(";
        for (std::size_t i = 0; i < sources.size(); ++i) {
          if (i != 0) label += "+";
          label += symbols_[sources[i]].label;
        }
        label += ")";
        if (taken(label)) label += "@" + std::to_string(disk + 1);
      }
    }
    symbols_.push_back({disk, SymbolRole::parity, std::move(label)});
    equations_.push_back({symbols_.size() - 1, std::move(sources)});
    return symbols_.size() - 1;
  }

  Layout build() && { return Layout(spec_, std::move(symbols_), std::move(equations_)); }

 private:
  bool taken(const std::string& l) const {
    return std::any_of(symbols_.begin(), symbols_.end(), [&](const Symbol& s) { return s.label == l; });
  }

  LayoutSpec spec_;
  std::vector<Symbol> symbols_;
  std::vector<ParityEquation> equations_;
};

inline int mod(int a, int m) { return ((a % m) + m) % m; }

inline Layout build_nway(LayoutSpec spec, int n) {
  if (n < 2 || spec.disks % n != 0) {
    throw ConstraintError("n-way replication needs N divisible by n >= 2");
  }
  LayoutBuilder b(spec);
  for (int g = 0; g < spec.disks / n; ++g) {
    const std::size_t d = b.data(g * n, "d" + std::to_string(g + 1));
    for (int r = 1; r < n; ++r) b.parity(g * n + r, {d});
  }
  return std::move(b).build();
}

// Primary disks 0..M-1 hold M rows each; secondary disk M+s in row r copies
// the primary strip of disk (s - r) mod M.
inline Layout build_grd(LayoutSpec spec) {
  if (spec.disks < 2 || spec.disks % 2 != 0) throw ConstraintError("GRD needs an even N >= 2");
  const int m = spec.disks / 2;
  LayoutBuilder b(spec);
  std::vector<std::vector<std::size_t>> strip(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < m; ++j) {
      strip[r].push_back(b.data(j, "d" + std::to_string(j + 1) + "." + std::to_string(r + 1)));
    }
  }
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < m; ++s) b.parity(m + s, {strip[r][static_cast<std::size_t>(mod(s - r, m))]});
  }
  return std::move(b).build();
}

// Cluster of n disks: the primary area of local disk a is cut into n-1
// pieces and piece b is mirrored on local disk (a + b) mod n.
inline Layout build_id(LayoutSpec spec) {
  const int c = spec.param;
  if (c < 1 || spec.disks % c != 0 || spec.disks / c < 2) {
    throw ConstraintError("ID needs c dividing N with at least two disks per cluster");
  }
  const int n = spec.disks / c;
  LayoutBuilder b(spec);
  for (int g = 0; g < c; ++g) {
    for (int a = 0; a < n; ++a) {
      for (int piece = 1; piece < n; ++piece) {
        const int disk = g * n + a;
        const std::size_t d =
            b.data(disk, "d" + std::to_string(disk + 1) + "." + std::to_string(piece));
        b.parity(g * n + mod(a + piece, n), {d});
      }
    }
  }
  return std::move(b).build();
}

inline Layout build_cd(LayoutSpec spec) {
  if (spec.disks < 3) throw ConstraintError("CD needs N >= 3");
  LayoutBuilder b(spec);
  std::vector<std::size_t> d;
  for (int i = 0; i < spec.disks; ++i) d.push_back(b.data(i, "d" + std::to_string(i + 1)));
  for (int i = 0; i < spec.disks; ++i) b.parity(mod(i + 1, spec.disks), {d[static_cast<std::size_t>(i)]});
  return std::move(b).build();
}

// D1, P12, D2, P23, ..., DM, PM1 with P_{i,i+1} = D_i xor D_{i+1}.
inline Layout build_lsi(LayoutSpec spec) {
  if (spec.disks < 6 || spec.disks % 2 != 0) throw ConstraintError("LSI needs an even N >= 6");
  const int m = spec.disks / 2;
  LayoutBuilder b(spec);
  std::vector<std::size_t> d;
  for (int j = 0; j < m; ++j) d.push_back(b.data(2 * j, "D" + std::to_string(j + 1)));
  for (int j = 0; j < m; ++j) {
    const int next = (j + 1) % m;
    b.parity(2 * j + 1, {d[static_cast<std::size_t>(j)], d[static_cast<std::size_t>(next)]},
             "P" + std::to_string(j + 1) + std::to_string(next + 1));
  }
  return std::move(b).build();
}

// Four Ddisks, four Pdisks; Pdisk i holds the cyclic window d_i d_{i+1} d_{i+2}.
inline Layout build_sspiral(LayoutSpec spec) {
  if (spec.disks != 8) throw ConstraintError("SSPiRAL(4+4,3) is defined for N = 8");
  LayoutBuilder b(spec);
  std::vector<std::size_t> d;
  for (int j = 0; j < 4; ++j) d.push_back(b.data(j, "d" + std::to_string(j + 1)));
  for (int j = 0; j < 4; ++j) {
    b.parity(4 + j, {d[static_cast<std::size_t>(j)], d[static_cast<std::size_t>((j + 1) % 4)],
                     d[static_cast<std::size_t>((j + 2) % 4)]});
  }
  return std::move(b).build();
}

// Each strip holds its own data element plus one parity over the data at
// fixed forward offsets. The tabulated layout uses (2,3,5); the variant built
// from the defining set kappa_1(0) = (1,2,4), s = 2 puts d_j's parities at
// j+3, j+4, j+6, i.e. forward offsets (2,4,5).
inline Layout build_weaver(LayoutSpec spec) {
  std::vector<int> offsets;
  if (spec.param == 2) {
    offsets = {1, 2};
  } else if (spec.param == 3) {
    offsets = spec.kind == LayoutKind::weaver_pds ? std::vector<int>{2, 4, 5} : std::vector<int>{2, 3, 5};
  } else {
    throw ConstraintError("Weaver(n,t,t) is available for t = 2 and t = 3");
  }
  if (spec.disks <= offsets.back()) throw ConstraintError("Weaver needs n greater than the largest offset");
  LayoutBuilder b(spec);
  std::vector<std::size_t> d;
  for (int i = 0; i < spec.disks; ++i) d.push_back(b.data(i, "d" + std::to_string(i + 1)));
  for (int i = 0; i < spec.disks; ++i) {
    std::vector<std::size_t> src;
    for (int o : offsets) src.push_back(d[static_cast<std::size_t>(mod(i + o, spec.disks))]);
    b.parity(i, std::move(src));
  }
  return std::move(b).build();
}

// Dual B-code with six columns of three bits.
inline Layout build_bcode6(LayoutSpec spec) {
  if (spec.disks != 6) throw ConstraintError("B-code layout is defined for 6 columns");
  LayoutBuilder b(spec);
  std::vector<std::size_t> a;
  for (int j = 0; j < 6; ++j) a.push_back(b.data(j, "a" + std::to_string(j + 1)));
  auto at = [&](int i) { return a[static_cast<std::size_t>(mod(i, 6))]; };
  for (int j = 0; j < 6; ++j) {
    b.parity(j, {at(j + 1), at(j + 2)});
    b.parity(j, {at(j + 3), at(j + 5)});
  }
  return std::move(b).build();
}

// GF(2^w) with a fixed primitive polynomial per width.
class GaloisField {
 public:
  explicit GaloisField(int w) : w_(w) {
    static constexpr unsigned polys[] = {0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43};
    if (w < 1 || w > 6) throw ConstraintError("field width out of range");
    poly_ = polys[w];
  }
  int width() const { return w_; }
  unsigned size() const { return 1u << w_; }
  unsigned mul(unsigned a, unsigned b) const {
    unsigned r = 0;
    while (b != 0) {
      if (b & 1u) r ^= a;
      b >>= 1u;
      a <<= 1u;
      if (a & size()) a ^= poly_;
    }
    return r;
  }
  unsigned inv(unsigned a) const {
    if (a == 0) throw ConstraintError("inverse of zero");
    for (unsigned x = 1; x < size(); ++x) {
      if (mul(a, x) == 1) return x;
    }
    throw ConstraintError("no inverse");
  }

 private:
  int w_;
  unsigned poly_;
};

// k = 1 is plain XOR parity. For k >= 2 a Cauchy Reed-Solomon code over
// GF(2^w) is expanded into w x w binary blocks, so each disk stores w bits.
inline Layout build_raidk(LayoutSpec spec) {
  const int k = spec.param;
  const int n = spec.disks;
  if (k < 1 || n <= k) throw ConstraintError("RAID(4+k) needs 1 <= k < N");
  LayoutBuilder b(spec);
  if (k == 1) {
    std::vector<std::size_t> d;
    for (int j = 0; j + 1 < n; ++j) d.push_back(b.data(j, "d" + std::to_string(j + 1)));
    b.parity(n - 1, d, "p");
    return std::move(b).build();
  }
  int w = 1;
  while ((1 << w) < n) ++w;
  const GaloisField gf(w);
  const int data_disks = n - k;
  std::vector<std::vector<std::size_t>> bits(static_cast<std::size_t>(data_disks));
  for (int j = 0; j < data_disks; ++j) {
    for (int c = 0; c < w; ++c) {
      bits[j].push_back(b.data(j, "d" + std::to_string(j + 1) + "." + std::to_string(c)));
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int row = 0; row < w; ++row) {
      std::vector<std::size_t> src;
      for (int j = 0; j < data_disks; ++j) {
        const unsigned coeff = gf.inv(static_cast<unsigned>(i) ^ static_cast<unsigned>(k + j));
        for (int c = 0; c < w; ++c) {
          if ((gf.mul(coeff, 1u << c) >> row) & 1u) src.push_back(bits[j][static_cast<std::size_t>(c)]);
        }
      }
      b.parity(data_disks + i, std::move(src), "p" + std::to_string(i + 1) + "." + std::to_string(row));
    }
  }
  return std::move(b).build();
}

}  // namespace detail

inline Layout build_layout(const LayoutSpec& spec) {
  if (spec.disks < 1 || spec.disks > 64) throw ConstraintError("disk count must be in [1, 64]");
  switch (spec.kind) {
    case LayoutKind::bm:
      if (spec.disks % 2 != 0) throw ConstraintError("BM needs an even N");
      return detail::build_nway(spec, 2);
    case LayoutKind::nway: return detail::build_nway(spec, spec.param);
    case LayoutKind::grd: return detail::build_grd(spec);
    case LayoutKind::id: return detail::build_id(spec);
    case LayoutKind::cd: return detail::build_cd(spec);
    case LayoutKind::lsi: return detail::build_lsi(spec);
    case LayoutKind::sspiral443: return detail::build_sspiral(spec);
    case LayoutKind::weaver:
    case LayoutKind::weaver_pds: return detail::build_weaver(spec);
    case LayoutKind::bcode6: return detail::build_bcode6(spec);
    case LayoutKind::raidk: return detail::build_raidk(spec);
    case LayoutKind::custom: break;
  }
  throw UnsupportedLayout("custom layouts are loaded from a document, not built");
}

inline void check_failure_set(const Layout& layout, const FailureSet& f) {
  const int n = layout.disks();
  if (n < 64 && (f.mask() >> n) != 0) throw ConstraintError("failure set names a disk outside [0, N)");
}

// True iff every data symbol lies in the span of the surviving symbols.
inline bool survives(const Layout& layout, const FailureSet& f) {
  check_failure_set(layout, f);
  const std::size_t dim = layout.data_count();
  gf2::Basis basis(dim, layout.symbols().size());
  for (int disk = 0; disk < layout.disks(); ++disk) {
    if (f.contains(disk)) continue;
    for (std::size_t s : layout.symbols_on(disk)) {
      basis.insert(layout.vector(s), s);
      if (basis.rank() == dim) return true;
    }
  }
  return basis.rank() == dim;
}

struct RecoveryStep {
  std::size_t target = 0;
  std::vector<std::size_t> sources;
};

struct RecoveryPlan {
  std::vector<RecoveryStep> steps;
};

struct Unrecoverable {
  std::vector<std::size_t> lost_data;
};

using RecoveryResult = std::variant<RecoveryPlan, Unrecoverable>;

// Rebuilds every symbol on the failed disks. Single-unknown parity
// relations are peeled first, which reproduces hand-written XOR chains;
// whatever is left is solved by elimination over the available symbols.
inline RecoveryResult recovery_plan(const Layout& layout, const FailureSet& f) {
  check_failure_set(layout, f);
  const auto& symbols = layout.symbols();
  std::vector<bool> known(symbols.size(), true);
  std::size_t missing = 0;
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    if (f.contains(symbols[s].disk)) {
      known[s] = false;
      ++missing;
    }
  }
  const std::size_t dim = layout.data_count();
  gf2::Basis surviving(dim, symbols.size());
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    if (known[s]) surviving.insert(layout.vector(s), s);
  }
  if (surviving.rank() < dim) {
    Unrecoverable u;
    for (std::size_t d : layout.data_symbols()) {
      if (!surviving.contains(layout.vector(d))) u.lost_data.push_back(d);
    }
    return u;
  }

  RecoveryPlan plan;
  auto peel = [&] {
    bool progress = true;
    while (progress && missing != 0) {
      progress = false;
      for (const ParityEquation& eq : layout.equations()) {
        std::size_t unknown = 0;
        std::size_t target = 0;
        auto visit = [&](std::size_t s) {
          if (!known[s]) {
            ++unknown;
            target = s;
          }
        };
        visit(eq.parity);
        for (std::size_t d : eq.data) visit(d);
        if (unknown != 1) continue;
        RecoveryStep step{target, {}};
        if (eq.parity != target) step.sources.push_back(eq.parity);
        for (std::size_t d : eq.data) {
          if (d != target) step.sources.push_back(d);
        }
        plan.steps.push_back(std::move(step));
        known[target] = true;
        --missing;
        progress = true;
      }
    }
  };
  peel();

  std::vector<std::size_t> stuck;
  for (std::size_t d : layout.data_symbols()) {
    if (!known[d]) stuck.push_back(d);
  }
  if (!stuck.empty()) {
    gf2::Basis available(dim, symbols.size());
    for (std::size_t s = 0; s < symbols.size(); ++s) {
      if (known[s]) available.insert(layout.vector(s), s);
    }
    for (std::size_t d : stuck) {
      auto combo = available.express(layout.vector(d));
      if (!combo) throw Error("internal: recoverable data symbol not in span");
      auto idx = combo->indices();
      plan.steps.push_back({d, {idx.begin(), idx.end()}});
    }
    for (std::size_t d : stuck) {
      known[d] = true;
      --missing;
    }
    peel();
  }
  return plan;
}

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

// Calls fn(FailureSet) for every i-subset of [0, n) in increasing mask order.
template <typename Fn>
void for_each_subset(int n, int i, Fn&& fn) {
  if (i < 0 || i > n) return;
  if (i == 0) {
    fn(FailureSet{});
    return;
  }
  std::uint64_t m = (i == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << i) - 1);
  const std::uint64_t limit = (n == 64) ? 0 : (std::uint64_t{1} << n);
  while (true) {
    fn(FailureSet::from_mask(m));
    // Gosper's hack: next integer with the same popcount.
    const std::uint64_t low = m & (~m + 1);
    const std::uint64_t ripple = m + low;
    if (ripple == 0) break;
    m = ripple | (((m ^ ripple) >> 2) / low);
    if (limit != 0 && m >= limit) break;
  }
}

// Number of i-disk failure sets that do not lose data.
inline std::uint64_t count_survivable(const Layout& layout, int i,
                                      std::uint64_t budget = kDefaultEnumerationBudget) {
  const int n = layout.disks();
  if (i < 0 || i > n) throw ConstraintError("failure count outside [0, N]");
  if (i > layout.max_tolerable()) return 0;
  if (binomial(n, i) > budget) {
    throw BudgetExceeded("C(" + std::to_string(n) + "," + std::to_string(i) +
                         ") exceeds the enumeration budget");
  }
  std::uint64_t count = 0;
  for_each_subset(n, i, [&](const FailureSet& f) {
    if (survives(layout, f)) ++count;
  });
  return count;
}

// ---------------------------------------------------------------------------
// Structured text form: {"kind", "disks", "param", "symbols", "equations"}.

inline LayoutKind parse_kind(std::string_view name) {
  for (LayoutKind k : {LayoutKind::bm, LayoutKind::nway, LayoutKind::grd, LayoutKind::id,
                       LayoutKind::cd, LayoutKind::lsi, LayoutKind::sspiral443, LayoutKind::weaver,
                       LayoutKind::weaver_pds, LayoutKind::bcode6, LayoutKind::raidk, LayoutKind::custom}) {
    if (kind_name(k) == name) return k;
  }
  throw ValidationError("kind", "unknown layout kind '" + std::string(name) + "'");
}

inline nlohmann::json to_json(const Layout& layout) {
  nlohmann::json j;
  j["kind"] = std::string(kind_name(layout.kind()));
  j["disks"] = layout.disks();
  j["param"] = layout.spec().param;
  j["max_tolerable"] = layout.max_tolerable();
  auto& syms = j["symbols"] = nlohmann::json::array();
  for (const Symbol& s : layout.symbols()) {
    syms.push_back({{"disk", s.disk},
                    {"role", s.role == SymbolRole::data ? "data" : "parity"},
                    {"label", s.label}});
  }
  auto& eqs = j["equations"] = nlohmann::json::array();
  for (const ParityEquation& e : layout.equations()) {
    eqs.push_back({{"parity", e.parity}, {"data", e.data}});
  }
  return j;
}

inline Layout layout_from_json(const nlohmann::json& j) {
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name)) throw ValidationError(name, "missing field");
    return j.at(name);
  };
  try {
    LayoutSpec spec{parse_kind(field("kind").get<std::string>()), field("disks").get<int>(),
                    j.value("param", 0)};
    std::vector<Symbol> symbols;
    const auto& syms = field("symbols");
    for (std::size_t i = 0; i < syms.size(); ++i) {
      const auto& s = syms[i];
      const std::string role = s.at("role").get<std::string>();
      if (role != "data" && role != "parity") {
        throw ValidationError("symbols[" + std::to_string(i) + "].role", "must be data or parity");
      }
      symbols.push_back({s.at("disk").get<int>(),
                         role == "data" ? SymbolRole::data : SymbolRole::parity,
                         s.value("label", "s" + std::to_string(i))});
    }
    std::vector<ParityEquation> equations;
    for (const auto& e : field("equations")) {
      equations.push_back({e.at("parity").get<std::size_t>(), e.at("data").get<std::vector<std::size_t>>()});
    }
    return Layout(spec, std::move(symbols), std::move(equations));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("layout", e.what());
  }
}

}  // namespace mirrorlab
