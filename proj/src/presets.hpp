#ifndef CDIFF_PRESETS_HPP
#define CDIFF_PRESETS_HPP

#include <vector>

namespace cdiff {

struct Preset {
  const char* name;
  const char* text;
};

const std::vector<Preset>& builtin_presets();

}  // namespace cdiff

#endif  // CDIFF_PRESETS_HPP
