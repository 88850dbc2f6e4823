#pragma once

#include <string>

#include "portnet/training.hpp"

namespace portnet::tgnn {

struct Checkpoint {
    TrainConfig config;
    TrainResult result;
    int in_dim = static_cast<int>(kFeatureDim);
};

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace portnet::tgnn
