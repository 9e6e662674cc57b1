#include "eoc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

namespace eoc::ckpt {

namespace {

class Encoder {
 public:
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
      bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    }
  }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

  void tensors(const Params& p) {
    p.for_each_tensor([&](std::string_view, const Eigen::Map<const Mat>& t) {
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
          f64(t(r, c));
        }
      }
    });
  }

  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Decoder {
 public:
  Decoder(std::vector<char> bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const std::string& what) {
    const std::uint64_t lo = u32(what);
    const std::uint64_t hi = u32(what);
    return lo | (hi << 32);
  }
  double f64(const std::string& what) { return std::bit_cast<double>(u64(what)); }

  bool starts_with_magic() const {
    return bytes_.size() >= sizeof(kMagic) && std::memcmp(bytes_.data(), kMagic, sizeof(kMagic)) == 0;
  }
  void skip(std::size_t n) { pos_ += n; }

  void tensors(Params& p, const std::string& section) {
    p.for_each_tensor([&](std::string_view name, Eigen::Map<Mat> t) {
      const std::string what = section + " tensor '" + std::string(name) + "'";
      need(static_cast<std::size_t>(t.size()) * 8, what);
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
          t(r, c) = f64(what);
        }
      }
    });
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const std::string& what) const {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError(CheckpointError::Kind::kTruncated,
                            "checkpoint '" + path_ + "' truncated while reading " + what);
    }
  }

  std::vector<char> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const ModelDims d = ck.params.dims();
  if (!(ck.adam.m.dims() == d) || !(ck.adam.v.dims() == d)) {
    throw CheckpointError(CheckpointError::Kind::kDimMismatch,
                          "checkpoint: optimizer state shape differs from parameters");
  }
  Encoder enc;
  enc.raw(kMagic, sizeof(kMagic));
  enc.u32(static_cast<std::uint32_t>(d.vocab));
  enc.u32(static_cast<std::uint32_t>(d.embed));
  enc.u32(static_cast<std::uint32_t>(d.hidden));
  enc.u32(ck.epoch);
  enc.tensors(ck.params);
  enc.u64(static_cast<std::uint64_t>(ck.adam.step_count));
  enc.f64(ck.adam.beta1);
  enc.f64(ck.adam.beta2);
  enc.f64(ck.adam.eps);
  enc.f64(ck.adam.lr);
  enc.tensors(ck.adam.m);
  enc.tensors(ck.adam.v);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: cannot write '" + tmp + "'");
    }
    out.write(enc.bytes().data(), static_cast<std::streamsize>(enc.bytes().size()));
    if (!out) {
      throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: write failed on '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw CheckpointError(CheckpointError::Kind::kIo,
                          "checkpoint: cannot move '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

Checkpoint load_checkpoint(const std::string& path, const std::optional<ModelDims>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointError::Kind::kIo, "checkpoint: cannot open '" + path + "'");
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Decoder dec(std::move(bytes), path);
  if (!dec.starts_with_magic()) {
    throw CheckpointError(CheckpointError::Kind::kBadMagic,
                          "checkpoint '" + path + "': bad magic or unsupported version");
  }
  dec.skip(sizeof(kMagic));
  ModelDims d;
  d.vocab = dec.u32("header");
  d.embed = dec.u32("header");
  d.hidden = dec.u32("header");
  if (d.vocab < 1 || d.embed < 1 || d.hidden < 1 || (expected && !(*expected == d))) {
    throw CheckpointError(CheckpointError::Kind::kDimMismatch,
                          "checkpoint '" + path + "': dims (" + std::to_string(d.vocab) + ", " +
                              std::to_string(d.embed) + ", " + std::to_string(d.hidden) +
                              ") do not match the configured model");
  }
  Checkpoint ck;
  ck.epoch = dec.u32("header");
  ck.params = Params(d);
  dec.tensors(ck.params, "params");
  ck.adam.step_count = static_cast<std::int64_t>(dec.u64("adam header"));
  ck.adam.beta1 = dec.f64("adam header");
  ck.adam.beta2 = dec.f64("adam header");
  ck.adam.eps = dec.f64("adam header");
  ck.adam.lr = dec.f64("adam header");
  ck.adam.m = Params(d);
  ck.adam.v = Params(d);
  dec.tensors(ck.adam.m, "adam.m");
  dec.tensors(ck.adam.v, "adam.v");
  if (!dec.at_end()) {
    throw CheckpointError(CheckpointError::Kind::kDimMismatch,
                          "checkpoint '" + path + "': trailing bytes after the last tensor");
  }
  return ck;
}

}  // namespace eoc::ckpt
