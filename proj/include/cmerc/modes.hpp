/*
 * Copyright 2026 The cmerc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace cmerc {

// Ingested feature streams. Video arrives as two parallel streams.
enum class Stream : std::size_t { text = 0, video_face = 1, video_back = 2, audio = 3 };
inline constexpr std::size_t kNumStreams = 4;
inline constexpr std::array<Stream, kNumStreams> kStreams = {Stream::text, Stream::video_face,
                                                             Stream::video_back, Stream::audio};

// Modalities seen by the cross-modal network and the fusion; the order here
// is the fixed block order of the fused descriptor.
enum class Mode : std::size_t { text = 0, video = 1, audio = 2 };
inline constexpr std::size_t kNumModes = 3;
inline constexpr std::array<Mode, kNumModes> kModes = {Mode::text, Mode::video, Mode::audio};

constexpr std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::text: return "text";
    case Stream::video_face: return "video_face";
    case Stream::video_back: return "video_back";
    case Stream::audio: return "audio";
  }
  return "?";
}

constexpr std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::text: return "text";
    case Mode::video: return "video";
    case Mode::audio: return "audio";
  }
  return "?";
}

constexpr Mode mode_of(Stream s) {
  switch (s) {
    case Stream::text: return Mode::text;
    case Stream::video_face:
    case Stream::video_back: return Mode::video;
    case Stream::audio: return Mode::audio;
  }
  return Mode::text;
}

constexpr std::size_t index_of(Stream s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index_of(Mode m) { return static_cast<std::size_t>(m); }

}  // namespace cmerc
