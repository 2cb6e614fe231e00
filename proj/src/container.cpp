#include "permez/container.hpp"

#include <array>
#include <cmath>
#include <string>

#include "permez/byte_io.hpp"
#include "permez/error.hpp"

namespace permez {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'M', 'E', 'Z'};

void corrupt(const std::string& what) { throw Error(ErrorKind::Corrupt, what); }

std::size_t payload_bytes(const std::vector<PartitionRecord>& parts) {
  if (parts.empty()) return 0;
  return static_cast<std::size_t>(parts.back().bit_offset / 8 + (parts.back().bit_len + 7) / 8);
}

}  // namespace

Codec Container::codec() const {
  return Codec{model, make_quantizer(m, std::log2(1.0 + b_r)), codebook, b_r, type};
}

std::size_t block_record_size(const CompressedBlock& cb) {
  std::size_t size = 1 + 8 + 8;
  if (cb.trivial) return size;
  return size + cb.partitions.size() * 24 + 8 + cb.balance_values.size() * 8 + cb.code_bits.size();
}

std::vector<std::uint8_t> write_container(const Container& c) {
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put(kContainerVersion);
  w.put(static_cast<std::uint8_t>(c.type));
  w.put(static_cast<std::uint64_t>(c.layout.rows));
  w.put(static_cast<std::uint64_t>(c.layout.cols));
  w.put(static_cast<std::uint32_t>(c.layout.block_rows));
  w.put(static_cast<std::uint32_t>(c.layout.block_cols));
  w.put(static_cast<std::uint32_t>(c.layout.partition_rows));
  w.put(c.b_r);
  w.put(c.coverage_target);
  w.put(static_cast<std::uint8_t>(c.m));
  const auto model = serialize_model(c.model);
  w.put(static_cast<std::uint64_t>(model.size()));
  w.put_bytes(model);
  const auto book = serialize_codebook(c.codebook);
  w.put(static_cast<std::uint64_t>(book.size()));
  w.put_bytes(book);
  w.put(static_cast<std::uint64_t>(c.blocks.size()));
  for (const CompressedBlock& b : c.blocks) {
    w.put(static_cast<std::uint8_t>(b.trivial ? 1 : 0));
    w.put(b.trivial ? 0.0 : b.params.factor_pos);
    w.put(b.trivial ? 0.0 : b.params.factor_neg);
    if (b.trivial) continue;
    for (const PartitionRecord& p : b.partitions) {
      w.put(p.bit_offset);
      w.put(p.bit_len);
      w.put(p.anchor);
    }
    w.put(static_cast<std::uint64_t>(b.balance_values.size()));
    for (double v : b.balance_values) w.put(v);
    w.put_bytes(b.code_bits);
  }
  return w.take();
}

Container read_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorKind::BadMagic, "not a PMEZ container");
  }
  ByteReader r(bytes.subspan(kMagic.size()));
  const auto version = r.get<std::uint16_t>();
  if (version != kContainerVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "container version " + std::to_string(version));
  }
  Container c;
  const auto type = r.get<std::uint8_t>();
  if (type > 1) corrupt("unknown element type");
  c.type = static_cast<ElementType>(type);
  c.layout.rows = r.get<std::uint64_t>();
  c.layout.cols = r.get<std::uint64_t>();
  c.layout.block_rows = r.get<std::uint32_t>();
  c.layout.block_cols = r.get<std::uint32_t>();
  c.layout.partition_rows = r.get<std::uint32_t>();
  if (c.layout.block_rows == 0 || c.layout.block_cols == 0 || c.layout.partition_rows == 0) {
    corrupt("zero block or partition size");
  }
  if (c.layout.rows / c.layout.block_rows > (1u << 31) || c.layout.cols / c.layout.block_cols > (1u << 31)) {
    corrupt("grid dimensions out of range");
  }
  c.b_r = r.get<double>();
  if (!(c.b_r > 0.0 && c.b_r < 1.0)) corrupt("relative error bound out of range");
  c.coverage_target = r.get<double>();
  if (!(c.coverage_target >= 0.0 && c.coverage_target <= 1.0)) corrupt("coverage target out of range");
  c.m = r.get<std::uint8_t>();
  if (c.m < kMinCodeBits || c.m > kMaxCodeBits) corrupt("code width out of range");

  const auto model_len = r.get<std::uint64_t>();
  if (model_len > r.remaining()) corrupt("model length exceeds file");
  try {
    c.model = deserialize_model(r.get_bytes(model_len));
  } catch (const Error& err) {
    corrupt(std::string("model: ") + err.what());
  }
  const auto book_len = r.get<std::uint64_t>();
  if (book_len > r.remaining()) corrupt("codebook length exceeds file");
  try {
    c.codebook = deserialize_codebook(r.get_bytes(book_len));
  } catch (const Error& err) {
    corrupt(std::string("codebook: ") + err.what());
  }
  if (c.codebook.alphabet_size() != (std::size_t{1} << c.m)) corrupt("codebook size does not match m");

  const auto block_count = r.get<std::uint64_t>();
  if (block_count != c.layout.block_count()) corrupt("block count does not match grid");
  if (block_count > r.remaining() / 17) corrupt("block count exceeds file");
  const Codec codec = c.codec();
  const double eps0 = epsilon0(c.type);
  c.blocks.reserve(block_count);
  for (std::uint64_t bi = 0; bi < block_count; ++bi) {
    CompressedBlock b;
    const auto trivial = r.get<std::uint8_t>();
    if (trivial > 1) corrupt("bad trivial flag");
    b.trivial = trivial == 1;
    const double fp = r.get<double>();
    const double fn = r.get<double>();
    if (b.trivial) {
      if (fp != 0.0 || fn != 0.0) corrupt("trivial block carries factors");
      c.blocks.push_back(std::move(b));
      continue;
    }
    if (!(std::isfinite(fp) && std::isfinite(fn) && fp > eps0 && fn > 0.0)) corrupt("invalid transform factors");
    b.params = transform_params_from_factors(fp, fn, c.b_r, eps0);
    const BlockExtent e = c.layout.block(bi);
    const std::size_t parts = c.layout.partition_count(e.rows);
    if (parts * 24 > r.remaining()) corrupt("partition table exceeds file");
    std::uint64_t expected_offset = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      PartitionRecord rec;
      rec.bit_offset = r.get<std::uint64_t>();
      rec.bit_len = r.get<std::uint64_t>();
      rec.anchor = r.get<double>();
      if (rec.bit_offset != expected_offset) corrupt("partition offsets are not contiguous");
      if (rec.bit_len > 8 * static_cast<std::uint64_t>(bytes.size())) corrupt("partition length exceeds file");
      if (!std::isfinite(rec.anchor)) corrupt("non-finite anchor");
      expected_offset = rec.bit_offset + (rec.bit_len + 7) / 8 * 8;
      b.partitions.push_back(rec);
    }
    const auto balance = r.get<std::uint64_t>();
    if (balance > r.remaining() / 8) corrupt("balance count exceeds file");
    b.balance_values.resize(balance);
    for (double& v : b.balance_values) {
      v = r.get<double>();
      if (!std::isfinite(v)) corrupt("non-finite balance value");
    }
    const auto payload = r.get_bytes(payload_bytes(b.partitions));
    b.code_bits.assign(payload.begin(), payload.end());
    try {
      decode_partitions(b, e.rows, e.cols, c.layout.partition_rows, codec.codebook);
    } catch (const Error& err) {
      corrupt("block " + std::to_string(bi) + ": " + err.what());
    }
    c.blocks.push_back(std::move(b));
  }
  if (r.remaining() != 0) corrupt("trailing bytes after last block");
  return c;
}

}  // namespace permez
