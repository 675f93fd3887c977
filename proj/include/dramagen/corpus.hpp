#pragma once

// TEI drama parsing and the `$`/`@` tagged flat-file corpus format.

#include <cstddef>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include <expat.h>
#include <spdlog/spdlog.h>

#include "dramagen/error.hpp"
#include "dramagen/normalizer.hpp"
#include "dramagen/utf8.hpp"

namespace dramagen {

enum class SourceKind { GerDraCor, DTA };
enum class ItemKind { Speech, Stage };
enum class TaggedMode { SpeechesOnly, Full };

struct SceneItem {
  ItemKind kind = ItemKind::Speech;
  std::string speaker;  // "#id" for speeches, empty for stage directions
  std::string text;     // single line, words joined by single spaces

  bool operator==(const SceneItem&) const = default;
};

struct Scene {
  std::size_t index = 0;
  std::vector<SceneItem> items;

  bool operator==(const Scene&) const = default;
};

struct Drama {
  std::string id;
  std::vector<Scene> scenes;
  SourceKind source = SourceKind::GerDraCor;
  std::string title;  // metadata, not part of the tagged format

  bool operator==(const Drama&) const = default;
};

/// Compares id and scene structure, ignoring metadata the tagged format does
/// not carry.
inline bool structurally_equal(const Drama& a, const Drama& b) {
  return a.id == b.id && a.scenes == b.scenes;
}

/// The drama as it appears in `mode`: stage directions dropped for
/// SpeechesOnly.
inline Drama restrict_to(const Drama& d, TaggedMode mode) {
  Drama out = d;
  if (mode == TaggedMode::SpeechesOnly) {
    for (auto& s : out.scenes)
      std::erase_if(s.items, [](const SceneItem& it) { return it.kind == ItemKind::Stage; });
  }
  return out;
}

inline std::string speaker_label(std::string_view speaker_id) {
  if (!speaker_id.empty() && speaker_id.front() == '#') speaker_id.remove_prefix(1);
  return std::string(speaker_id);
}

struct ParseOptions {
  SourceKind source = SourceKind::GerDraCor;
  const NormalizationLexicon* lexicon = nullptr;  // applied to GerDraCor only
  std::optional<std::string> fallback_id;         // used when TEI has no xml:id
};

namespace detail {

inline std::string_view local_name(const XML_Char* qname) {
  std::string_view n(qname);
  // expat is created with a namespace separator of '|'
  if (const auto bar = n.rfind('|'); bar != std::string_view::npos) n.remove_prefix(bar + 1);
  if (const auto colon = n.rfind(':'); colon != std::string_view::npos) n.remove_prefix(colon + 1);
  return n;
}

inline const XML_Char* attr(const XML_Char** atts, std::string_view name) {
  for (int i = 0; atts[i] != nullptr; i += 2) {
    std::string_view key(atts[i]);
    if (key == name) return atts[i + 1];
    if (const auto bar = key.rfind('|'); bar != std::string_view::npos) {
      if (key.substr(bar + 1) == name) return atts[i + 1];
    }
  }
  return nullptr;
}

// SAX state machine. Only the current drama's items are held in memory.
class TeiHandler {
 public:
  explicit TeiHandler(const ParseOptions& opts) : opts_(opts) {}

  void start(std::string_view name, const XML_Char** atts) {
    if (name == "TEI" && drama_.id.empty()) {
      if (const auto* id = attr(atts, "http://www.w3.org/XML/1998/namespace|id")) drama_.id = id;
      else if (const auto* id2 = attr(atts, "id")) drama_.id = id2;
    }
    if (name == "teiHeader") ++in_header_;
    if (in_header_ > 0) {
      if (name == "title" && drama_.title.empty() && !title_done_) in_title_ = true;
      return;
    }
    if (name == "body") in_body_ = true;
    if (!in_body_) return;

    if (skip_depth_ > 0 || is_skipped(name, atts)) {
      ++skip_depth_;
      return;
    }
    if (name == "choice") {
      choice_depth_.push_back(true);
      return;
    }
    if (name == "div" || name == "div1" || name == "div2" || name == "div3") {
      const auto* type = attr(atts, "type");
      const std::string_view t = type ? type : "";
      const bool is_scene = t == "scene" || name == "div2";
      if (is_scene && !in_explicit_scene_) {
        flush_scene();
        in_explicit_scene_ = true;
        scene_div_depth_ = div_depth_;
      } else if (!in_explicit_scene_) {
        flush_scene();
      }
      ++div_depth_;
      return;
    }
    if (name == "sp") {
      begin_item(ItemKind::Speech);
      if (const auto* who = attr(atts, "who")) item_.speaker = utf8::lower(first_id(who));
      return;
    }
    if (name == "speaker" && in_item_ && item_.kind == ItemKind::Speech) {
      in_speaker_ = true;
      return;
    }
    if (name == "stage" || name == "set") {
      if (in_item_) {
        // stage direction nested inside a speech: emitted after the speech
        nested_stage_.emplace_back();
        in_nested_stage_ = true;
        return;
      }
      begin_item(ItemKind::Stage);
      return;
    }
    if (is_break(name)) separator();
  }

  void end(std::string_view name) {
    if (in_header_ > 0) {
      if (name == "title" && in_title_) {
        in_title_ = false;
        title_done_ = true;
      }
      if (name == "teiHeader") --in_header_;
      return;
    }
    if (!in_body_) return;
    if (skip_depth_ > 0) {
      --skip_depth_;
      return;
    }
    if (name == "choice") {
      if (!choice_depth_.empty()) choice_depth_.pop_back();
      return;
    }
    if (name == "body") {
      flush_scene();
      in_body_ = false;
      return;
    }
    if (name == "div" || name == "div1" || name == "div2" || name == "div3") {
      --div_depth_;
      if (in_explicit_scene_) {
        if (div_depth_ == scene_div_depth_) {
          flush_scene();
          in_explicit_scene_ = false;
        }
      } else {
        flush_scene();
      }
      return;
    }
    if (name == "speaker" && in_speaker_) {
      in_speaker_ = false;
      return;
    }
    if ((name == "stage" || name == "set") && in_nested_stage_) {
      in_nested_stage_ = false;
      return;
    }
    if (name == "sp" || name == "stage" || name == "set") {
      end_item();
      return;
    }
    if (is_break(name)) separator();
  }

  void characters(std::string_view s) {
    if (in_title_) {
      drama_.title += s;
      return;
    }
    if (!in_body_ || skip_depth_ > 0 || !in_item_) return;
    if (in_speaker_) {
      speaker_text_ += s;
      return;
    }
    if (in_nested_stage_) {
      nested_stage_.back() += s;
      return;
    }
    raw_ += s;
  }

  Drama finish() {
    flush_scene();
    if (drama_.id.empty()) {
      if (!opts_.fallback_id) throw XmlParseError("drama has no xml:id", 0);
      drama_.id = *opts_.fallback_id;
    }
    if (drama_.scenes.empty()) throw XmlParseError("drama '" + drama_.id + "' has no text body", 0);
    for (std::size_t i = 0; i < drama_.scenes.size(); ++i) drama_.scenes[i].index = i;
    drama_.source = opts_.source;
    drama_.title = join_words(drama_.title, false);
    return std::move(drama_);
  }

 private:
  static std::string first_id(std::string_view who) {
    auto ids = utf8::split_ws(who);
    if (ids.empty()) return {};
    std::string out = ids[0];
    for (std::size_t i = 1; i < ids.size(); ++i) out += "_" + ids[i];
    return out;
  }

  bool is_skipped(std::string_view name, const XML_Char** atts) const {
    if (name == "front" || name == "back" || name == "castList" || name == "note" ||
        name == "fw" || name == "head" || name == "docTitle" || name == "titlePage" ||
        name == "figure" || name == "trailer")
      return true;
    if (!choice_depth_.empty()) {
      const bool prefer_reg = opts_.source == SourceKind::DTA;
      if (name == "sic" || name == "abbr") return true;
      if (name == "orig") return prefer_reg;
      if (name == "reg") return !prefer_reg;
    }
    (void)atts;
    return false;
  }

  static bool is_break(std::string_view name) {
    return name == "p" || name == "l" || name == "lg" || name == "lb" || name == "ab" ||
           name == "pb" || name == "cb";
  }

  void separator() {
    if (in_item_ && !in_speaker_) {
      if (in_nested_stage_) nested_stage_.back() += ' ';
      else raw_ += ' ';
    }
  }

  void begin_item(ItemKind kind) {
    if (in_item_) end_item();
    in_item_ = true;
    item_ = SceneItem{kind, {}, {}};
    raw_.clear();
    speaker_text_.clear();
    nested_stage_.clear();
  }

  std::string join_words(std::string_view raw, bool normalize) const {
    std::string out;
    const bool apply = normalize && opts_.lexicon != nullptr && opts_.source == SourceKind::GerDraCor;
    for (const auto& w : utf8::split_ws(raw)) {
      if (!out.empty()) out += ' ';
      out += apply ? normalize_token(w, *opts_.lexicon) : w;
    }
    return out;
  }

  void end_item() {
    if (!in_item_) return;
    in_item_ = false;
    item_.text = join_words(raw_, true);
    if (item_.kind == ItemKind::Speech && item_.speaker.empty()) {
      // no @who: derive an id from the <speaker> label
      auto label = utf8::lower(join_words(speaker_text_, false));
      while (!label.empty() && (label.back() == '.' || label.back() == ':' || label.back() == ','))
        label.pop_back();
      for (auto& c : label)
        if (c == ' ') c = '_';
      if (!label.empty()) item_.speaker = "#" + label;
    }
    if (!item_.text.empty() && (item_.kind == ItemKind::Stage || !item_.speaker.empty()))
      scene_.items.push_back(std::move(item_));
    for (const auto& st : nested_stage_) {
      auto text = join_words(st, true);
      if (!text.empty()) scene_.items.push_back({ItemKind::Stage, {}, std::move(text)});
    }
    nested_stage_.clear();
  }

  void flush_scene() {
    if (in_item_) end_item();
    if (!scene_.items.empty()) drama_.scenes.push_back(std::move(scene_));
    scene_ = Scene{};
  }

  const ParseOptions& opts_;
  Drama drama_;
  Scene scene_;
  SceneItem item_;
  std::string raw_, speaker_text_;
  std::vector<std::string> nested_stage_;
  std::vector<bool> choice_depth_;
  int in_header_ = 0;
  int skip_depth_ = 0;
  int div_depth_ = 0;
  int scene_div_depth_ = 0;
  bool in_body_ = false, in_item_ = false, in_speaker_ = false, in_nested_stage_ = false;
  bool in_explicit_scene_ = false, in_title_ = false, title_done_ = false;
};

}  // namespace detail

/// Parses one TEI drama. Front matter, cast list, headings and notes are
/// skipped. Scene divisions delimit scenes; without them every act (or other
/// top-level division) becomes a scene. For DTA input `<reg>` readings win
/// over `<orig>`; for GerDraCor input the lexicon, if given, normalizes each
/// word.
inline Drama parse_tei(std::string_view xml, const ParseOptions& opts = {}) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreateNS("UTF-8", '|'), &XML_ParserFree);
  if (!parser) throw Error("cannot allocate XML parser");
  detail::TeiHandler handler(opts);
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(
      parser.get(),
      [](void* ud, const XML_Char* name, const XML_Char** atts) {
        static_cast<detail::TeiHandler*>(ud)->start(detail::local_name(name), atts);
      },
      [](void* ud, const XML_Char* name) {
        static_cast<detail::TeiHandler*>(ud)->end(detail::local_name(name));
      });
  XML_SetCharacterDataHandler(parser.get(), [](void* ud, const XML_Char* s, int len) {
    static_cast<detail::TeiHandler*>(ud)->characters(std::string_view(s, static_cast<std::size_t>(len)));
  });

  constexpr std::size_t chunk = 1 << 16;
  std::size_t pos = 0;
  do {
    const std::size_t n = std::min(chunk, xml.size() - pos);
    const bool last = pos + n == xml.size();
    if (XML_Parse(parser.get(), xml.data() + pos, static_cast<int>(n), last) == XML_STATUS_ERROR) {
      throw XmlParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                          static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get())));
    }
    pos += n;
  } while (pos < xml.size());
  return handler.finish();
}

inline Drama parse_tei(std::string_view xml, SourceKind source,
                       const NormalizationLexicon* lexicon = nullptr) {
  ParseOptions opts;
  opts.source = source;
  opts.lexicon = lexicon;
  return parse_tei(xml, opts);
}

/// Keeps the first drama of every title; later exact-title matches are
/// dropped and logged. Dramas without a title are always kept.
inline std::vector<Drama> deduplicate_by_title(std::vector<Drama> dramas) {
  std::map<std::string, std::string> seen;  // normalized title -> id
  std::vector<Drama> out;
  for (auto& d : dramas) {
    const auto key = utf8::lower(d.title);
    if (!key.empty()) {
      auto [it, inserted] = seen.emplace(key, d.id);
      if (!inserted) {
        spdlog::info("duplicate drama '{}' ({}) matches {}; dropped", d.title, d.id, it->second);
        continue;
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tagged corpus format.
//
//   $id_<id>            drama
//   $scene              scene / act
//   $sp_<speaker>       speech, text on the following line(s)
//   $                   set or stage direction (Full mode only)
// Every opening line has a matching `@` line; consecutive items of a scene are
// separated by one blank line.

inline void write_tagged(std::ostream& os, const std::vector<Drama>& dramas, TaggedMode mode) {
  for (const auto& d : dramas) {
    os << "$id_" << d.id << '\n';
    for (const auto& s : d.scenes) {
      os << "$scene\n";
      bool first = true;
      for (const auto& it : s.items) {
        if (it.kind == ItemKind::Stage && mode == TaggedMode::SpeechesOnly) continue;
        if (!first) os << '\n';
        first = false;
        if (it.kind == ItemKind::Speech) {
          os << "$sp_" << it.speaker << '\n' << it.text << '\n' << "@sp_" << it.speaker << '\n';
        } else {
          os << "$\n" << it.text << "\n@\n";
        }
      }
      os << "@scene\n";
    }
    os << "@id_" << d.id << '\n';
  }
}

inline std::string write_tagged(const std::vector<Drama>& dramas, TaggedMode mode) {
  std::ostringstream os;
  write_tagged(os, dramas, mode);
  return os.str();
}

/// Inverse of write_tagged. Multiple text lines inside one item are joined
/// with single spaces.
inline std::vector<Drama> read_tagged(std::string_view text) {
  std::vector<Drama> out;
  enum class Level { Top, Drama, Scene, Item };
  Level level = Level::Top;
  std::string open_tag;
  std::size_t open_line = 0, scene_line = 0, drama_line = 0;
  Drama drama;
  Scene scene;
  SceneItem item;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (pos > text.size() && line.empty()) break;
    if (utf8::trim(line).empty()) continue;

    const auto fail = [&](const std::string& what, std::string_view tag) -> void {
      throw TaggedFormatError(what, std::string(tag), lineno);
    };

    if (line.starts_with("$id_")) {
      if (level != Level::Top) fail("drama opened inside an open element", open_tag.empty() ? line : open_tag);
      drama = Drama{};
      drama.id = std::string(line.substr(4));
      if (drama.id.empty()) fail("empty drama id", line);
      level = Level::Drama;
      drama_line = lineno;
    } else if (line.starts_with("@id_")) {
      if (level != Level::Drama) {
        if (level == Level::Scene) throw TaggedFormatError("unclosed tag", "$scene", scene_line);
        if (level == Level::Item) throw TaggedFormatError("unclosed tag", open_tag, open_line);
        fail("closing tag without opening tag", line);
      }
      if (line.substr(4) != drama.id) fail("closing id does not match $id_" + drama.id, line);
      for (std::size_t i = 0; i < drama.scenes.size(); ++i) drama.scenes[i].index = i;
      out.push_back(std::move(drama));
      drama = Drama{};
      level = Level::Top;
    } else if (line == "$scene") {
      if (level != Level::Drama) {
        if (level == Level::Top) fail("scene outside of a drama", line);
        if (level == Level::Scene) throw TaggedFormatError("unclosed tag", "$scene", scene_line);
        throw TaggedFormatError("unclosed tag", open_tag, open_line);
      }
      scene = Scene{};
      level = Level::Scene;
      scene_line = lineno;
    } else if (line == "@scene") {
      if (level != Level::Scene) {
        if (level == Level::Item) throw TaggedFormatError("unclosed tag", open_tag, open_line);
        fail("closing tag without opening tag", line);
      }
      drama.scenes.push_back(std::move(scene));
      scene = Scene{};
      level = Level::Drama;
    } else if (line.starts_with("$sp_") || line == "$") {
      if (level != Level::Scene) {
        if (level == Level::Item) throw TaggedFormatError("unclosed tag", open_tag, open_line);
        fail("item outside of a scene", line);
      }
      item = SceneItem{};
      if (line == "$") {
        item.kind = ItemKind::Stage;
      } else {
        item.kind = ItemKind::Speech;
        item.speaker = std::string(line.substr(4));
        if (item.speaker.empty()) fail("empty speaker id", line);
      }
      open_tag = std::string(line);
      open_line = lineno;
      level = Level::Item;
    } else if (line.starts_with("@sp_") || line == "@") {
      if (level != Level::Item) fail("closing tag without opening tag", line);
      const bool ok = (line == "@") ? item.kind == ItemKind::Stage
                                    : item.kind == ItemKind::Speech && line.substr(4) == item.speaker;
      if (!ok) fail("closing tag does not match " + open_tag, line);
      scene.items.push_back(std::move(item));
      item = SceneItem{};
      level = Level::Scene;
    } else {
      if (level != Level::Item) fail("text outside of a speech or stage direction", line);
      if (!item.text.empty()) item.text += ' ';
      item.text += utf8::trim(line);
    }
  }
  switch (level) {
    case Level::Top: break;
    case Level::Drama: throw TaggedFormatError("unclosed tag", "$id_" + drama.id, drama_line);
    case Level::Scene: throw TaggedFormatError("unclosed tag", "$scene", scene_line);
    case Level::Item: throw TaggedFormatError("unclosed tag", open_tag, open_line);
  }
  return out;
}

}  // namespace dramagen
