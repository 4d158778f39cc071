#ifndef MPT_CHECKPOINT_HPP
#define MPT_CHECKPOINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mpt/model.hpp"

namespace mpt {

// MPT1 checkpoint file, little-endian throughout:
//   magic "MPT1"
//   u32 version
//   u32 spec text length, spec text
//   per prunable layer (count derived from the spec):
//     u32 rank, u32 dims[rank]
//     f32 latent weights, f32 raw scores (numel each)
//     ceil(numel/8) mask bytes, LSB-first
//     f32 alpha, f32 scale
//   u64 seed
//   u8 phase
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint<float>& ckpt, const std::string& path);
Checkpoint<float> load_checkpoint(const std::string& path);

// LSB-first bit packing used by the mask records.
std::vector<uint8_t> pack_mask_bits(const Tensor<uint8_t>& mask);
void unpack_mask_bits(const std::vector<uint8_t>& bytes, Tensor<uint8_t>& mask);

}  // namespace mpt

#endif  // MPT_CHECKPOINT_HPP
