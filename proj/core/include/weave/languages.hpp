#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace weave {

/// Language codes known to the classifier (and to the stub scorer).
std::span<const std::string_view> language_table();

std::optional<std::size_t> language_index(std::string_view code);

}  // namespace weave
