#include "qst/state_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace qst {

namespace {

constexpr char kMagic[4] = {'Q', 'S', 'T', '\0'};

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFU));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  void matrix_row_major(const CMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        f64(m(i, j).real());
        f64(m(i, j).imag());
      }
    }
  }
  void write_to(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  void expect_magic() {
    need(4);
    if (std::memcmp(bytes_.data(), kMagic, 4) != 0) throw QstFormatError("bad .qst magic");
    pos_ += 4;
  }
  CMatrix matrix_row_major(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double re = f64();
        const double im = f64();
        m(i, j) = Complex(re, im);
      }
    }
    return m;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw QstFormatError("truncated .qst file");
  }
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

void write_header(ByteWriter& w, std::uint32_t kind, int n, int r, std::uint32_t norm) {
  w.raw(kMagic, 4);
  w.u32(kQstVersion);
  w.u32(kind);
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(r));
  w.u32(norm);
}

}  // namespace

void save_qst(const std::filesystem::path& path, const FactorState& state) {
  ByteWriter w;
  write_header(w, 0, state.num_qubits(), state.rank(), 0);
  w.matrix_row_major(state.matrix());
  w.write_to(path);
}

void save_qst(const std::filesystem::path& path, const GroundTruth& truth) {
  ByteWriter w;
  write_header(w, 1, truth.num_qubits(), truth.rank(),
               static_cast<std::uint32_t>(truth.normalization()));
  for (Eigen::Index j = 0; j < truth.spectrum().size(); ++j) w.f64(truth.spectrum()(j));
  w.matrix_row_major(truth.eigvecs());
  w.write_to(path);
}

QstObject load_qst(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  ByteReader rd(std::move(bytes));
  rd.expect_magic();
  if (const auto version = rd.u32(); version != kQstVersion) {
    throw QstFormatError("unsupported .qst version " + std::to_string(version));
  }
  const auto kind = rd.u32();
  const auto n = rd.u32();
  const auto r = rd.u32();
  const auto norm = rd.u32();
  if (n < 1 || n > 30 || r < 1 || r > (1U << n)) throw QstFormatError("bad .qst shape");
  const auto d = Eigen::Index{1} << n;

  if (kind == 0) {
    CMatrix u = rd.matrix_row_major(d, r);
    if (!rd.at_end()) throw QstFormatError("trailing bytes in .qst file");
    return FactorState(std::move(u));
  }
  if (kind == 1) {
    if (norm != 1 && norm != 2) throw QstFormatError("bad .qst normalization tag");
    RVector spectrum(r);
    for (std::uint32_t j = 0; j < r; ++j) spectrum(j) = rd.f64();
    CMatrix v = rd.matrix_row_major(d, r);
    if (!rd.at_end()) throw QstFormatError("trailing bytes in .qst file");
    return GroundTruth(std::move(v), std::move(spectrum), static_cast<Normalization>(norm));
  }
  throw QstFormatError("unknown .qst object kind " + std::to_string(kind));
}

}  // namespace qst
