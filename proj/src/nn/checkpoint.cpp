#include "dfi/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "dfi/errors.hpp"

namespace dfi::nn {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'I', '1'};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> data) : data_(std::move(data)) {}

  bool has(std::size_t n) const { return pos_ + n <= data_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return data_.size(); }

  std::uint64_t get(int n, const std::string& what) {
    if (!has(static_cast<std::size_t>(n))) throw ParseError("checkpoint: truncated " + what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32(const std::string& what) { return static_cast<std::uint32_t>(get(4, what)); }
  std::uint64_t u64(const std::string& what) { return get(8, what); }
  void f32s(std::vector<float>& out, const std::string& what) {
    if (!has(out.size() * 4)) throw ParseError("checkpoint: truncated " + what);
    for (float& f : out) f = std::bit_cast<float>(u32(what));
  }
  bool magic_ok() {
    if (!has(4) || std::memcmp(data_.data(), kMagic, 4) != 0) return false;
    pos_ = 4;
    return true;
  }

 private:
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, Writer& w) {
  w.u64(w.buffer().size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Reader read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data));
  if (!r.magic_ok()) throw ParseError("checkpoint: bad magic");
  return r;
}

void check_length(Reader& r) {
  const std::size_t body = r.pos();
  const std::uint64_t stored = r.u64("length check");
  if (stored != body || r.pos() != r.size()) {
    throw ParseError("checkpoint: length check mismatch (stored " + std::to_string(stored) +
                     ", body " + std::to_string(body) + ")");
  }
}

std::string layer_label(std::size_t i, LayerKind k) {
  return "layer " + std::to_string(i) + " (" + std::string(to_string(k)) + ")";
}

}  // namespace

void save_checkpoint(const Regressor& net, const std::filesystem::path& path) {
  const Architecture& a = net.architecture();
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(static_cast<std::uint32_t>(a.input.channels));
  w.u32(static_cast<std::uint32_t>(a.input.height));
  w.u32(static_cast<std::uint32_t>(a.input.width));
  w.u32(static_cast<std::uint32_t>(a.layers.size()));
  for (const LayerSpec& l : a.layers) {
    w.u32(static_cast<std::uint32_t>(l.kind));
    w.u32(static_cast<std::uint32_t>(l.in_channels));
    w.u32(static_cast<std::uint32_t>(l.out_channels));
    w.u32(static_cast<std::uint32_t>(l.kernel));
  }
  for (const ConvParams<float>& p : net.params()) {
    for (float f : p.weight) w.f32(f);
    for (float f : p.bias) w.f32(f);
  }
  write_file(path, w);
}

Regressor load_checkpoint(const std::filesystem::path& path,
                          const std::optional<Architecture>& expected) {
  Reader r = read_file(path);
  Architecture a;
  a.input.channels = static_cast<int>(r.u32("header"));
  a.input.height = static_cast<int>(r.u32("header"));
  a.input.width = static_cast<int>(r.u32("header"));
  const std::uint32_t count = r.u32("header");
  if (count == 0) throw ParseError("checkpoint: no layers (heatmap dump?)");
  if (!r.has(static_cast<std::size_t>(count) * 16)) throw ParseError("checkpoint: truncated layer table");
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec l;
    const std::uint32_t kind = r.u32("layer table");
    if (kind > 2) throw ParseError("checkpoint: unknown kind in layer " + std::to_string(i));
    l.kind = static_cast<LayerKind>(kind);
    l.in_channels = static_cast<int>(r.u32("layer table"));
    l.out_channels = static_cast<int>(r.u32("layer table"));
    l.kernel = static_cast<int>(r.u32("layer table"));
    a.layers.push_back(l);
  }
  if (expected) {
    if (a.input != expected->input) {
      throw ParseError("checkpoint: dimension mismatch: input shape");
    }
    if (a.layers.size() != expected->layers.size()) {
      throw ParseError("checkpoint: dimension mismatch: layer count " + std::to_string(a.layers.size()) +
                       ", expected " + std::to_string(expected->layers.size()));
    }
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
      if (a.layers[i] != expected->layers[i]) {
        throw ParseError("checkpoint: dimension mismatch: " + layer_label(i, a.layers[i].kind));
      }
    }
  }
  try {
    (void)a.shapes();
  } catch (const ContractError& e) {
    throw ParseError(std::string("checkpoint: dimension mismatch: ") + e.what());
  }
  Regressor net(a);
  std::size_t p = 0;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].kind != LayerKind::conv) continue;
    const std::string what = "tensor in " + layer_label(i, a.layers[i].kind);
    r.f32s(net.params()[p].weight, what);
    r.f32s(net.params()[p].bias, what);
    ++p;
  }
  check_length(r);
  return net;
}

void save_heatmap_dump(const HeatmapStack& stack, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(static_cast<std::uint32_t>(stack.channels));
  w.u32(static_cast<std::uint32_t>(stack.height));
  w.u32(static_cast<std::uint32_t>(stack.width));
  w.u32(0);
  for (float f : stack.data) w.f32(f);
  write_file(path, w);
}

HeatmapStack load_heatmap_dump(const std::filesystem::path& path) {
  Reader r = read_file(path);
  const int k = static_cast<int>(r.u32("header"));
  const int h = static_cast<int>(r.u32("header"));
  const int w = static_cast<int>(r.u32("header"));
  if (r.u32("header") != 0) throw ParseError("heatmap dump: unexpected layer table");
  if (k < 1 || h < 1 || w < 1) throw ParseError("heatmap dump: dimension mismatch: empty stack");
  HeatmapStack s(w, h, k);
  r.f32s(s.data, "heatmap tensor");
  check_length(r);
  return s;
}

}  // namespace dfi::nn
