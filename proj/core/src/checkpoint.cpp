#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "xeval/error.hpp"
#include "xeval/gnn.hpp"

namespace xeval {

namespace {

constexpr std::array<char, 8> kMagic{'X', 'E', 'V', 'A', 'L', 'G', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxDim = 1u << 20;

void put_u64(std::ostream& out, std::uint64_t x) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void put_u32(std::ostream& out, std::uint32_t x) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw DataError("checkpoint is truncated");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return x;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) throw DataError("checkpoint is truncated");
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return x;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_checkpoint(const GnnModel& m, std::ostream& out) {
  m.validate();
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(m.layers.size()));
  put_u64(out, m.seed);
  for (const DenseLayer& layer : m.layers) {
    put_u64(out, layer.weight.rows());
    put_u64(out, layer.weight.cols());
    for (double w : layer.weight.values()) put_f64(out, w);
    for (double b : layer.bias) put_f64(out, b);
  }
  put_u64(out, m.scorer.size());
  for (double w : m.scorer) put_f64(out, w);
}

GnnModel read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw DataError("not a model checkpoint (bad magic)");
  const std::uint32_t version = get_u32(in);
  if (version != kVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t layer_count = get_u32(in);
  if (layer_count == 0 || layer_count > 64) throw DataError("implausible layer count in checkpoint");

  GnnModel m;
  m.seed = get_u64(in);
  for (std::uint32_t k = 0; k < layer_count; ++k) {
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim)
      throw DataError("implausible layer dimensions in checkpoint");
    DenseLayer layer{Matrix(rows, cols), std::vector<double>(rows)};
    for (double& w : layer.weight.values()) w = get_f64(in);
    for (double& b : layer.bias) b = get_f64(in);
    m.layers.push_back(std::move(layer));
  }
  const std::uint64_t scorer_len = get_u64(in);
  if (scorer_len > 2 * kMaxDim) throw DataError("implausible scorer length in checkpoint");
  m.scorer.resize(scorer_len);
  for (double& w : m.scorer) w = get_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in checkpoint");
  m.validate();
  return m;
}

void save_checkpoint(const GnnModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write checkpoint " + path.string());
  write_checkpoint(m, out);
  if (!out) throw UsageError("failed writing checkpoint " + path.string());
}

GnnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace xeval
