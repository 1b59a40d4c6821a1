// Copyright 2026 The apifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "apifuzz/constraints.h"
#include "json.hpp"

namespace apifuzz {

using nlohmann::json;

std::string_view ConstraintKindName(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kNonNull: return "NON-NULL";
    case ConstraintKind::kFile: return "FILE";
    case ConstraintKind::kEqual: return "EQUAL";
    case ConstraintKind::kRange: return "RANGE";
    case ConstraintKind::kArrayLen: return "ARRAY-LEN";
    case ConstraintKind::kCast: return "CAST";
  }
  return "?";
}

std::optional<ConstraintKind> ParseConstraintKind(std::string_view name) {
  for (auto k : {ConstraintKind::kNonNull, ConstraintKind::kFile, ConstraintKind::kEqual,
                 ConstraintKind::kRange, ConstraintKind::kArrayLen, ConstraintKind::kCast}) {
    if (ConstraintKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::string LocatorToString(const Locator& l) {
  std::string out = absl::StrCat("arg", l.arg);
  if (!l.path.empty()) absl::StrAppend(&out, "[", FieldPathToString(l.path), "]");
  return out;
}

bool Constraint::SameAs(const Constraint& o) const {
  return function == o.function && locator == o.locator && kind == o.kind && peer == o.peer &&
         min == o.min && max == o.max && min_len == o.min_len && as_type == o.as_type;
}

std::string DescribeConstraint(const Constraint& c) {
  std::string out = absl::StrCat(c.function, " ", LocatorToString(c.locator), " ",
                                 std::string(ConstraintKindName(c.kind)));
  switch (c.kind) {
    case ConstraintKind::kEqual:
      if (c.peer) absl::StrAppend(&out, " len(", LocatorToString(*c.peer), ")");
      break;
    case ConstraintKind::kRange:
      absl::StrAppend(&out, " [", c.min ? absl::StrCat(*c.min) : "-inf", ", ",
                      c.max ? absl::StrCat(*c.max) : "+inf", "]");
      if (c.peer) absl::StrAppend(&out, " < len(", LocatorToString(*c.peer), ")");
      break;
    case ConstraintKind::kArrayLen:
      absl::StrAppend(&out, " >= ", c.min_len);
      break;
    case ConstraintKind::kCast:
      absl::StrAppend(&out, " as ", c.as_type);
      break;
    default:
      break;
  }
  return out;
}

namespace {

json LocatorJson(const Locator& l) {
  json path = json::array();
  for (const auto& seg : l.path.segments) {
    if (const auto* i = std::get_if<uint64_t>(&seg)) {
      path.push_back(*i);
    } else {
      path.push_back(std::get<std::string>(seg));
    }
  }
  return json{{"arg", l.arg}, {"path", path}};
}

absl::StatusOr<Locator> LocatorFromJson(const json& j) {
  if (!j.is_object() || !j.contains("arg") || !j["arg"].is_number_unsigned()) {
    return absl::InvalidArgumentError("locator needs an unsigned \"arg\"");
  }
  Locator l;
  l.arg = j["arg"].get<uint32_t>();
  if (j.contains("path")) {
    if (!j["path"].is_array()) return absl::InvalidArgumentError("locator path must be an array");
    for (const auto& seg : j["path"]) {
      if (seg.is_number_unsigned()) {
        l.path.segments.emplace_back(seg.get<uint64_t>());
      } else if (seg.is_string()) {
        l.path.segments.emplace_back(seg.get<std::string>());
      } else {
        return absl::InvalidArgumentError("path segments are indices or field names");
      }
    }
  }
  return l;
}

}  // namespace

std::string ConstraintToJson(const Constraint& c, bool archived) {
  json params = json::object();
  if (c.peer) params["peer"] = LocatorJson(*c.peer);
  if (c.kind == ConstraintKind::kRange) {
    params["min"] = c.min ? json(*c.min) : json(nullptr);
    params["max"] = c.max ? json(*c.max) : json(nullptr);
  }
  if (c.kind == ConstraintKind::kArrayLen) params["min-len"] = c.min_len;
  if (c.kind == ConstraintKind::kCast) params["as"] = c.as_type;
  json j = {{"function", c.function},
            {"locator", LocatorJson(c.locator)},
            {"kind", std::string(ConstraintKindName(c.kind))},
            {"params", params},
            {"provenance", c.provenance},
            {"witness-program-id", c.witness}};
  if (archived) j["archived"] = true;
  return j.dump();
}

absl::StatusOr<std::pair<Constraint, bool>> ConstraintFromJson(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return absl::InvalidArgumentError("not a JSON object");
  Constraint c;
  if (!j.contains("function") || !j["function"].is_string()) {
    return absl::InvalidArgumentError("constraint needs a \"function\"");
  }
  c.function = j["function"].get<std::string>();
  if (!j.contains("locator")) return absl::InvalidArgumentError("constraint needs a \"locator\"");
  auto loc = LocatorFromJson(j["locator"]);
  if (!loc.ok()) return loc.status();
  c.locator = *loc;
  if (!j.contains("kind") || !j["kind"].is_string()) {
    return absl::InvalidArgumentError("constraint needs a \"kind\"");
  }
  auto kind = ParseConstraintKind(j["kind"].get<std::string>());
  if (!kind) return absl::InvalidArgumentError(absl::StrCat("unknown kind ", j["kind"].dump()));
  c.kind = *kind;
  json params = j.value("params", json::object());
  if (params.contains("peer")) {
    auto peer = LocatorFromJson(params["peer"]);
    if (!peer.ok()) return peer.status();
    c.peer = *peer;
  }
  if (params.contains("min") && params["min"].is_number_integer()) c.min = params["min"].get<int64_t>();
  if (params.contains("max") && params["max"].is_number_integer()) c.max = params["max"].get<int64_t>();
  if (params.contains("min-len")) c.min_len = params["min-len"].get<uint64_t>();
  if (params.contains("as")) c.as_type = params["as"].get<std::string>();
  if (c.kind == ConstraintKind::kEqual && !c.peer) {
    return absl::InvalidArgumentError("EQUAL needs a peer");
  }
  c.provenance = j.value("provenance", "");
  c.witness = j.value("witness-program-id", uint64_t{0});
  return std::make_pair(std::move(c), j.value("archived", false));
}

namespace {

bool Conflicts(const Constraint& a, const Constraint& b) {
  if (a.function != b.function || !(a.locator == b.locator)) return false;
  if (a.kind == b.kind) return true;
  auto numeric = [](ConstraintKind k) {
    return k == ConstraintKind::kEqual || k == ConstraintKind::kRange;
  };
  return numeric(a.kind) && numeric(b.kind);
}

}  // namespace

bool ConstraintStore::Add(Constraint c) {
  for (const auto& a : active_) {
    if (a.SameAs(c)) return false;
  }
  for (auto it = active_.begin(); it != active_.end();) {
    if (Conflicts(*it, c)) {
      archived_.push_back(std::move(*it));
      it = active_.erase(it);
    } else {
      ++it;
    }
  }
  active_.push_back(std::move(c));
  ++version_;
  return true;
}

bool ConstraintStore::Remove(std::string_view function, const Locator& locator,
                             ConstraintKind kind, std::string_view provenance) {
  bool changed = false;
  for (auto it = active_.begin(); it != active_.end();) {
    if (it->function == function && it->locator == locator && it->kind == kind) {
      it->provenance = absl::StrCat(it->provenance, "; removed: ", std::string(provenance));
      archived_.push_back(std::move(*it));
      it = active_.erase(it);
      changed = true;
    } else {
      ++it;
    }
  }
  if (changed) ++version_;
  return changed;
}

std::vector<const Constraint*> ConstraintStore::For(std::string_view function) const {
  std::vector<const Constraint*> out;
  for (const auto& c : active_) {
    if (c.function == function) out.push_back(&c);
  }
  return out;
}

const Constraint* ConstraintStore::Find(std::string_view function, const Locator& locator,
                                        ConstraintKind kind) const {
  for (const auto& c : active_) {
    if (c.function == function && c.locator == locator && c.kind == kind) return &c;
  }
  return nullptr;
}

bool ConstraintStore::MarkCastCandidate(std::string_view function, uint32_t arg) {
  for (const auto& [f, a] : cast_seen_) {
    if (f == function && a == arg) return false;
  }
  for (const auto* list : {&active_, &archived_}) {
    for (const auto& c : *list) {
      if (c.kind == ConstraintKind::kCast && c.function == function && c.locator.arg == arg &&
          c.locator.path.empty()) {
        return false;
      }
    }
  }
  cast_seen_.emplace_back(std::string(function), arg);
  return true;
}

std::string ConstraintStore::ToJsonLines() const {
  std::string out;
  for (const auto& c : active_) absl::StrAppend(&out, ConstraintToJson(c), "\n");
  for (const auto& c : archived_) absl::StrAppend(&out, ConstraintToJson(c, true), "\n");
  return out;
}

absl::StatusOr<ConstraintStore> ConstraintStore::FromJsonLines(std::string_view text) {
  ConstraintStore store;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto parsed = ConstraintFromJson(std::string_view(line.data(), line.size()));
    if (!parsed.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", std::string(parsed.status().message())));
    }
    auto& [c, archived] = *parsed;
    if (c.kind == ConstraintKind::kCast) store.cast_seen_.emplace_back(c.function, c.locator.arg);
    if (archived) {
      store.archived_.push_back(std::move(c));
    } else {
      store.active_.push_back(std::move(c));
    }
  }
  return store;
}

}  // namespace apifuzz
