#pragma once

#include "json.hpp"

namespace owadd {

class Autoencoder;

/// JSON codec for model snapshots, shared by file save/load and the
/// detector state snapshot.
struct AutoencoderCodec {
    static nlohmann::json to_json(const Autoencoder& model);
    static Autoencoder from_json(const nlohmann::json& j);
};

} // namespace owadd
