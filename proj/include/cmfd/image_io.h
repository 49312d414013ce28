#pragma once

#include <filesystem>
#include <span>

#include "cmfd/matcher.h"
#include "cmfd/raster.h"

namespace cmfd {

// Decodes PNG/JPEG/TIFF. Color sources give 3 planes (R, G, B), grayscale
// sources 1 plane; alpha is dropped. 8-bit values map to v/255 and 16-bit
// values to v/65535. Stored pixels are used as is; EXIF orientation is not
// applied.
//
// Throws IoError when the file cannot be read and FormatError when it cannot
// be decoded.
Raster LoadImage(const std::filesystem::path& path);

// Writes an 8-bit PNG (samples rounded from [0,1] to [0,255]).
void SavePng(const Raster& image, const std::filesystem::path& path);

// Returns a 3-channel copy of `image` with every match drawn as a segment
// between its keypoints and a filled disc on each endpoint. Pixels off the
// drawn geometry keep their source values.
Raster DrawMatches(const Raster& image, std::span<const MatchPair> matches);

// DrawMatches followed by SavePng.
void RenderOverlay(const Raster& image, std::span<const MatchPair> matches,
                   const std::filesystem::path& path);

}  // namespace cmfd
