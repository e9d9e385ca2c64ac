#pragma once

#include <string_view>

// Contents of data/*.{txt,csv}, compiled in by CMake.
namespace depsum::data {

extern const std::string_view kStopwordsEn;
extern const std::string_view kAlertingWords;

}  // namespace depsum::data
