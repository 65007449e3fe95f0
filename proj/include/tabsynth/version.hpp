#ifndef TABSYNTH_VERSION_HPP
#define TABSYNTH_VERSION_HPP

namespace tabsynth {

constexpr const char* kVersion = "0.1.0";

}

#endif
