#pragma once

namespace kfbias {

/// Tool/library version, embedded in every output bundle for provenance.
inline constexpr const char* version = "0.1.0";

}  // namespace kfbias
