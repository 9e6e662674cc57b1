// Binary checkpoint container.
//
// Layout (all integers and floats little-endian):
//   8 bytes   magic "LSTMCK01"
//   u32 x 3   vocab, embed, hidden
//   u32       epoch index
//   f64 ...   every LstmParams tensor in for_each_tensor order, row-major:
//             embedding, W_xi, W_xf, W_xo, W_xc, W_hi, W_hf, W_ho, W_hc,
//             b_i, b_f, b_o, b_c, w_out, b_out
//   u64       adam step count
//   f64 x 4   beta1, beta2, eps, lr
//   f64 ...   Adam first moments, same tensor order
//   f64 ...   Adam second moments, same tensor order
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "eoc/lstm.hpp"
#include "eoc/training.hpp"

namespace eoc::ckpt {

inline constexpr char kMagic[8] = {'L', 'S', 'T', 'M', 'C', 'K', '0', '1'};

struct Checkpoint {
  std::uint32_t epoch = 0;
  Params params;
  train::AdamState adam;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kTruncated, kDimMismatch };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Writes to `path` via a temporary file and rename, so an interrupted
/// save never leaves a half-written checkpoint behind.
void save_checkpoint(const std::string& path, const Checkpoint& ck);

/// Throws CheckpointError with the matching kind. When `expected` is given,
/// the header dims must equal it.
Checkpoint load_checkpoint(const std::string& path,
                           const std::optional<ModelDims>& expected = std::nullopt);

}  // namespace eoc::ckpt
