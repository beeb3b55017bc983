#include "gmfs/qtable.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gmfs/errors.hpp"

namespace gmfs {

static_assert(std::endian::native == std::endian::little,
              "Q-table IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'G', 'M', 'F', 'S', 'Q', 'T', '0', '1'};

std::size_t hist_alphabet_for(Mode mode, std::size_t ns, std::size_t na) {
  return mode == Mode::kJoint ? ns * na : ns;
}

template <typename T>
void put(std::vector<unsigned char>& buf, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> data) : data_(data) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw FormatError("Q-table file is truncated");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const unsigned char> take(std::size_t n) {
    if (pos_ + n > data_.size()) throw FormatError("Q-table file is truncated");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const unsigned char> bytes) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

const char* to_string(Mode mode) { return mode == Mode::kJoint ? "joint" : "marginal"; }

QTable::QTable(Mode mode, std::size_t n_states, std::size_t n_actions, std::uint32_t kappa,
               QTableMeta meta)
    : mode_(mode),
      n_states_(n_states),
      n_actions_(n_actions),
      kappa_(kappa),
      index_(hist_alphabet_for(mode, n_states, n_actions), kappa),
      n_hist_(0),
      meta_(std::move(meta)) {
  if (n_states == 0 || n_actions == 0) throw DomainError("Q-table needs |S|, |A| >= 1");
  const std::uint64_t cells = static_cast<std::uint64_t>(n_states) * n_actions;
  if (index_.total() > (std::uint64_t{1} << 40) / cells) {
    throw BudgetError("Q-table with " + std::to_string(index_.total()) +
                      " histograms per (s, a) exceeds the memory budget");
  }
  n_hist_ = static_cast<std::size_t>(index_.total());
  values_.assign(cells * n_hist_, 0.0);
}

double QTable::at(std::size_t s, std::size_t a, const Histogram& h) const {
  if (s >= n_states_ || a >= n_actions_) throw DomainError("Q-table (s, a) out of range");
  return values_[offset(s, a, index_.rank(h))];
}

double QTable::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double sup_distance(const QTable& a, const QTable& b) {
  if (a.size() != b.size() || a.mode() != b.mode()) {
    throw DimensionError("sup_distance: tables differ in shape");
  }
  double m = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
  return m;
}

void save_qtable(const QTable& q, const std::string& path) {
  std::vector<unsigned char> buf(std::begin(kMagic), std::end(kMagic));
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(q.mode()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(q.n_states()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(q.n_actions()));
  put<std::uint32_t>(buf, q.kappa());
  put<double>(buf, q.meta().gamma);
  put<double>(buf, q.meta().residual);
  put<std::uint64_t>(buf, q.meta().seed);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(q.meta().env_name.size()));
  buf.insert(buf.end(), q.meta().env_name.begin(), q.meta().env_name.end());
  for (double v : q.values()) put<double>(buf, v);
  put<std::uint32_t>(buf, crc_of(buf));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw Error("failed writing " + path);
}

QTable load_qtable(const std::string& path, std::optional<QTableShape> expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 4) throw FormatError("Q-table file is truncated");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), buf.begin())) {
    if (std::equal(kMagic, kMagic + 6, buf.begin())) {
      throw FormatError("unsupported Q-table version tag");
    }
    throw FormatError("not a Q-table file (bad magic)");
  }
  const std::span<const unsigned char> body(buf.data(), buf.size() - 4);
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (crc_of(body) != stored_crc) throw FormatError("Q-table checksum mismatch (corrupt file)");

  Reader in(body);
  in.take(sizeof(kMagic));
  const auto mode_byte = in.get<std::uint8_t>();
  if (mode_byte > 1) throw FormatError("unknown Q-table mode");
  const Mode mode = static_cast<Mode>(mode_byte);
  const auto ns = in.get<std::uint32_t>();
  const auto na = in.get<std::uint32_t>();
  const auto kappa = in.get<std::uint32_t>();
  QTableMeta meta;
  meta.gamma = in.get<double>();
  meta.residual = in.get<double>();
  meta.seed = in.get<std::uint64_t>();
  const auto name_len = in.get<std::uint32_t>();
  auto name = in.take(name_len);
  meta.env_name.assign(name.begin(), name.end());

  if (expected) {
    auto mismatch = [](const char* what, std::uint64_t want, std::uint64_t got) {
      throw DimensionError(std::string("Q-table ") + what + " mismatch: expected " +
                           std::to_string(want) + ", file has " + std::to_string(got));
    };
    if (expected->mode != mode) mismatch("mode", static_cast<int>(expected->mode), mode_byte);
    if (expected->n_states != ns) mismatch("|S|", expected->n_states, ns);
    if (expected->n_actions != na) mismatch("|A|", expected->n_actions, na);
    if (expected->kappa != kappa) mismatch("kappa", expected->kappa, kappa);
  }
  if (ns == 0 || na == 0 || kappa == 0) throw FormatError("Q-table header has a zero dimension");

  QTable q(mode, ns, na, kappa, meta);
  if (body.size() - in.pos() != q.size() * sizeof(double)) {
    throw FormatError("Q-table payload length does not match its header");
  }
  for (double& v : q.values()) v = in.get<double>();
  return q;
}

}  // namespace gmfs
