#include "permez/huffman.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include "permez/byte_io.hpp"
#include "permez/error.hpp"

namespace permez {

HuffmanCodebook HuffmanCodebook::from_lengths(std::vector<std::uint8_t> lengths) {
  HuffmanCodebook book;
  int max_len = 0;
  for (auto l : lengths) max_len = std::max<int>(max_len, l);
  if (max_len == 0) throw Error(ErrorKind::InvalidArgument, "codebook assigns no symbols");
  if (max_len > kMaxCodeLength) throw Error(ErrorKind::InvalidArgument, "code length exceeds supported maximum");

  book.count_.assign(max_len + 1, 0);
  for (auto l : lengths)
    if (l) ++book.count_[l];

  // Kraft equality: sum of 2^(max_len - l) must equal 2^max_len.
  std::uint64_t kraft = 0;
  for (int l = 1; l <= max_len; ++l) kraft += static_cast<std::uint64_t>(book.count_[l]) << (max_len - l);
  if (kraft != (std::uint64_t{1} << max_len)) {
    throw Error(ErrorKind::InvalidArgument, "code lengths violate Kraft equality");
  }

  book.sorted_symbols_.reserve(lengths.size());
  for (int l = 1; l <= max_len; ++l)
    for (std::uint32_t s = 0; s < lengths.size(); ++s)
      if (lengths[s] == l) book.sorted_symbols_.push_back(s);

  book.first_code_.assign(max_len + 1, 0);
  book.first_index_.assign(max_len + 1, 0);
  book.codewords_.assign(lengths.size(), 0);
  std::uint64_t code = 0;
  std::uint32_t index = 0;
  for (int l = 1; l <= max_len; ++l) {
    code <<= 1;
    book.first_code_[l] = code;
    book.first_index_[l] = index;
    for (std::uint32_t k = 0; k < book.count_[l]; ++k) {
      book.codewords_[book.sorted_symbols_[index + k]] = code + k;
    }
    code += book.count_[l];
    index += book.count_[l];
  }
  book.lengths_ = std::move(lengths);
  book.max_length_ = max_len;
  return book;
}

HuffmanCodebook build_codebook(const FrequencyTable& freqs) {
  if (freqs.size() < 2) throw Error(ErrorKind::DegenerateAlphabet, "alphabet needs at least two symbols");
  std::vector<std::uint32_t> live;
  for (std::uint32_t s = 0; s < freqs.size(); ++s) {
    if (!(freqs[s] >= 0.0)) throw Error(ErrorKind::InvalidArgument, "frequencies must be non-negative");
    if (freqs[s] > 0.0) live.push_back(s);
  }
  std::vector<std::uint8_t> lengths(freqs.size(), 0);
  if (live.empty()) throw Error(ErrorKind::DegenerateAlphabet, "no symbol has nonzero frequency");
  if (live.size() == 1) {
    lengths[live[0]] = 1;
    lengths[live[0] == 0 ? 1 : 0] = 1;
    return HuffmanCodebook::from_lengths(std::move(lengths));
  }

  // Nodes ordered by (weight, id); leaves take their symbol index as id and
  // merged nodes take increasing ids past the alphabet, which fixes ties.
  using Node = std::tuple<double, std::uint32_t>;
  std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
  std::vector<std::uint32_t> parent(freqs.size() + live.size(), 0);
  for (auto s : live) heap.emplace(freqs[s], s);
  auto next_id = static_cast<std::uint32_t>(freqs.size());
  while (heap.size() > 1) {
    auto [wa, a] = heap.top();
    heap.pop();
    auto [wb, b] = heap.top();
    heap.pop();
    parent[a] = next_id;
    parent[b] = next_id;
    heap.emplace(wa + wb, next_id++);
  }
  const std::uint32_t root = std::get<1>(heap.top());
  // Depth of internal nodes, resolved top-down (parents have larger ids).
  std::vector<int> depth(next_id, 0);
  for (std::uint32_t id = root; id > freqs.size();) {
    --id;
    depth[id] = depth[parent[id]] + 1;
  }
  for (auto s : live) {
    const int d = depth[parent[s]] + 1;
    if (d > kMaxCodeLength) throw Error(ErrorKind::InvalidArgument, "frequency skew exceeds maximum code length");
    lengths[s] = static_cast<std::uint8_t>(d);
  }
  return HuffmanCodebook::from_lengths(std::move(lengths));
}

std::vector<std::uint8_t> serialize_codebook(const HuffmanCodebook& book) {
  ByteWriter w;
  // 65536 symbols (m = 16) does not fit in 16 bits and is written as 0.
  w.put(static_cast<std::uint16_t>(book.alphabet_size() & 0xFFFF));
  w.put_bytes(book.lengths());
  return w.take();
}

HuffmanCodebook deserialize_codebook(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::size_t size = r.get<std::uint16_t>();
  if (size == 0) size = 65536;
  auto raw = r.get_bytes(size);
  if (r.remaining() != 0) throw Error(ErrorKind::Corrupt, "trailing bytes after codebook");
  try {
    return HuffmanCodebook::from_lengths({raw.begin(), raw.end()});
  } catch (const Error& e) {
    throw Error(ErrorKind::Corrupt, e.what());
  }
}

void BitStream::write_bits(std::uint64_t bits, int count) {
  for (int i = count - 1; i >= 0; --i) {
    const auto byte = static_cast<std::size_t>(bit_len_ >> 3);
    if (byte == bytes_.size()) bytes_.push_back(0);
    if ((bits >> i) & 1u) bytes_[byte] |= static_cast<std::uint8_t>(0x80u >> (bit_len_ & 7));
    ++bit_len_;
  }
}

void BitStream::align() { bit_len_ = (bit_len_ + 7) & ~std::uint64_t{7}; }

void encode(std::span<const std::uint32_t> codes, const HuffmanCodebook& book, BitStream& sink) {
  for (auto c : codes) {
    const int len = book.length(c);
    if (len == 0) throw Error(ErrorKind::UnassignedCode, "symbol " + std::to_string(c) + " has no codeword");
    sink.write_bits(book.codeword(c), len);
  }
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_len) : bytes_(bytes), bit_len_(bit_len) {
  if (bit_len > 8 * static_cast<std::uint64_t>(bytes.size())) {
    throw Error(ErrorKind::TruncatedStream, "bit length exceeds the byte payload");
  }
}

std::uint32_t BitReader::decode_next(const HuffmanCodebook& book) {
  std::uint64_t code = 0;
  for (int len = 1; len <= book.max_length_; ++len) {
    if (pos_ >= bit_len_) throw Error(ErrorKind::TruncatedStream, "bit stream ended inside a codeword");
    const int bit = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    code = (code << 1) | static_cast<std::uint64_t>(bit);
    const std::uint64_t offset = code - book.first_code_[len];
    if (code >= book.first_code_[len] && offset < book.count_[len]) {
      return book.sorted_symbols_[book.first_index_[len] + offset];
    }
  }
  throw Error(ErrorKind::InvalidPrefix, "no codeword matches the stream");
}

}  // namespace permez
