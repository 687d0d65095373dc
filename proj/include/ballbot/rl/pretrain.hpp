#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ballbot/config.hpp"

namespace ballbot::rl {

struct PretrainReport {
  int dataset_size = 0;
  int holdout_size = 0;
  std::vector<double> train_losses;    // per epoch
  std::vector<double> holdout_losses;  // per epoch
  std::string encoder_path;
};

// Collect depth frames from PID-driven rollouts over random uneven terrains,
// then train the encoder as the encoding half of a mirror autoencoder
// (mean-squared reconstruction loss). The encoder is saved frozen.
PretrainReport pretrain_encoder(const RunConfig& config, const std::string& out_path,
                                std::uint64_t seed, int num_frames = 4096,
                                int epochs = 8, std::ostream* log = nullptr);

}  // namespace ballbot::rl
