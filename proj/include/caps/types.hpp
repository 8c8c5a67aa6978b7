#pragma once

#include <compare>
#include <cstddef>
#include <functional>

namespace caps {

/// Dense zero-based index tagged with the space it indexes into.
template <class Tag>
struct Index {
  std::size_t index = 0;

  constexpr Index() = default;
  constexpr explicit Index(std::size_t i) : index(i) {}

  friend constexpr auto operator<=>(Index, Index) = default;
};

struct StateTag {};
struct ActionTag {};
struct OptionTag {};

using StateId = Index<StateTag>;
using ActionId = Index<ActionTag>;
using OptionId = Index<OptionTag>;

}  // namespace caps

template <class Tag>
struct std::hash<caps::Index<Tag>> {
  std::size_t operator()(caps::Index<Tag> i) const noexcept { return std::hash<std::size_t>{}(i.index); }
};
