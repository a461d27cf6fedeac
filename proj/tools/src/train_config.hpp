#pragma once

#include <string_view>

#include "jointparse/trainer.hpp"

namespace jointparse::cli {

// Reads a training configuration with the sections data, model, train and
// eval. Every key is optional; unknown keys and wrongly typed values throw
// std::invalid_argument. The result is validated for range only when the
// treebank size is known (TrainConfig::validate).
TrainConfig parse_train_config(std::string_view json_text);

TrainMode parse_mode(std::string_view text);

}  // namespace jointparse::cli
