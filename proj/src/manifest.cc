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

#include "apifuzz/manifest.h"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace apifuzz {
namespace {

using json = nlohmann::json;

absl::Status SchemaError(std::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("manifest schema violation: ", std::string(what)));
}

absl::StatusOr<std::string> GetString(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    return SchemaError(absl::StrCat("missing string field '", key, "'"));
  }
  return it->get<std::string>();
}

absl::StatusOr<TypeId> RefType(TypeRegistry& reg, const json& obj, const char* key,
                               std::string_view context) {
  auto spelled = GetString(obj, key);
  if (!spelled.ok()) return spelled.status();
  auto id = reg.Intern(*spelled);
  if (!id.ok()) {
    return absl::InvalidArgumentError(absl::StrCat("dangling type reference '", *spelled,
                                                   "' in ", std::string(context)));
  }
  return id;
}

const std::vector<size_t> kNoProducers;
const std::vector<std::pair<size_t, size_t>> kNoOutProducers;

}  // namespace

const FuncSig* Manifest::FindFunction(std::string_view name) const {
  auto idx = FunctionIndex(name);
  return idx ? &functions_[*idx] : nullptr;
}

std::optional<size_t> Manifest::FunctionIndex(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const std::vector<size_t>& Manifest::ProducersOf(TypeId type) const {
  auto it = producers_.find(type);
  return it == producers_.end() ? kNoProducers : it->second;
}

const std::vector<std::pair<size_t, size_t>>& Manifest::OutParamProducersOf(TypeId type) const {
  auto it = out_producers_.find(type);
  return it == out_producers_.end() ? kNoOutProducers : it->second;
}

absl::StatusOr<Manifest> Manifest::Build(std::string library, TypeRegistry types,
                                         std::vector<FuncSig> functions) {
  if (auto st = types.Freeze(); !st.ok()) return st;
  Manifest m;
  m.library_ = std::move(library);
  m.types_ = std::move(types);
  m.functions_ = std::move(functions);
  for (size_t i = 0; i < m.functions_.size(); ++i) {
    const FuncSig& sig = m.functions_[i];
    if (!m.by_name_.emplace(sig.name, i).second) {
      return absl::AlreadyExistsError(absl::StrCat("duplicate function '", sig.name, "'"));
    }
    if (sig.ret >= m.types_.size()) {
      return absl::InvalidArgumentError(absl::StrCat("dangling return type in '", sig.name, "'"));
    }
    std::set<std::string> names;
    for (const auto& p : sig.params) {
      if (p.type >= m.types_.size()) {
        return absl::InvalidArgumentError(
            absl::StrCat("dangling type of parameter '", p.name, "' in '", sig.name, "'"));
      }
      if (!names.insert(p.name).second) {
        return absl::InvalidArgumentError(
            absl::StrCat("duplicate parameter '", p.name, "' in '", sig.name, "'"));
      }
    }
  }
  const TypeRegistry& reg = m.types_;
  for (TypeId t = 0; t < reg.size(); ++t) {
    if (reg.IsVoid(t)) continue;
    for (size_t i = 0; i < m.functions_.size(); ++i) {
      const FuncSig& sig = m.functions_[i];
      if (!reg.IsVoid(sig.ret) && reg.Same(sig.ret, t)) m.producers_[t].push_back(i);
      if (!reg.IsPointer(t)) continue;
      for (size_t p = 0; p < sig.params.size(); ++p) {
        const TypeDesc& pd = reg.Resolved(sig.params[p].type);
        if (pd.kind() == TypeKind::kPointer && reg.Same(pd.pointer().pointee, t) &&
            reg.IsOpaquePointer(t)) {
          m.out_producers_[t].emplace_back(i, p);
        }
      }
    }
  }
  return m;
}

absl::StatusOr<Manifest> ParseManifest(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return SchemaError("not a JSON object");
  auto library = GetString(doc, "library");
  if (!library.ok()) return library.status();
  const json& types = doc.value("types", json::array());
  const json& functions = doc.value("functions", json::array());
  if (!types.is_array() || !functions.is_array()) {
    return SchemaError("'types' and 'functions' must be arrays");
  }

  TypeRegistry reg;
  std::vector<std::pair<TypeId, const json*>> decls;
  for (const auto& t : types) {
    if (!t.is_object()) return SchemaError("type entry is not an object");
    auto name = GetString(t, "name");
    if (!name.ok()) return name.status();
    auto id = reg.Declare(*name);
    if (!id.ok()) return id.status();
    decls.emplace_back(*id, &t);
  }

  std::set<TypeId> record_ids;
  for (auto [id, tp] : decls) {
    if (tp->value("kind", "") == "record") record_ids.insert(id);
  }

  // Records may need the layout of other records; they are defined last, in
  // dependency order.
  std::vector<std::pair<TypeId, const json*>> records;
  for (auto [id, tp] : decls) {
    const json& t = *tp;
    std::string context = absl::StrCat("type '", reg.Get(id).name, "'");
    auto kind = GetString(t, "kind");
    if (!kind.ok()) return kind.status();
    TypeDesc desc;
    if (*kind == "primitive") {
      PrimitiveType prim;
      prim.width_bits = t.value("width_bits", 0u);
      if (prim.width_bits != 8 && prim.width_bits != 16 && prim.width_bits != 32 &&
          prim.width_bits != 64) {
        return SchemaError(absl::StrCat(context, ": width_bits must be 8, 16, 32 or 64"));
      }
      prim.is_signed = t.value("signed", true);
      prim.is_float = t.value("float", false);
      if (prim.is_float && prim.width_bits < 32) {
        return SchemaError(absl::StrCat(context, ": floats are 32 or 64 bits"));
      }
      if (auto it = t.find("variants"); it != t.end()) {
        if (!it->is_array()) return SchemaError(absl::StrCat(context, ": variants must be an array"));
        for (const auto& v : *it) prim.variants.push_back(v.get<int64_t>());
      }
      desc.detail = prim;
    } else if (*kind == "array") {
      auto elem = RefType(reg, t, "element", context);
      if (!elem.ok()) return elem.status();
      ArrayType arr{*elem, std::nullopt};
      if (auto it = t.find("len"); it != t.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) return SchemaError(absl::StrCat(context, ": len must be unsigned"));
        arr.fixed_len = it->get<uint64_t>();
      }
      desc.detail = arr;
    } else if (*kind == "record") {
      records.emplace_back(id, tp);
      continue;
    } else if (*kind == "alias") {
      auto target = RefType(reg, t, "of", context);
      if (!target.ok()) return target.status();
      desc.detail = AliasType{*target};
    } else if (*kind == "pointer") {
      auto pointee = RefType(reg, t, "pointee", context);
      if (!pointee.ok()) return pointee.status();
      bool trivial;
      if (auto tr = t.find("trivial"); tr != t.end() && tr->is_boolean()) {
        trivial = tr->get<bool>();
      } else if (record_ids.contains(reg.Resolve(*pointee))) {
        trivial = true;
      } else {
        TypeKind pk = reg.KindOf(*pointee);
        trivial = pk != TypeKind::kOpaque && pk != TypeKind::kVoid && pk != TypeKind::kFuncPtr;
      }
      desc.detail = PointerType{*pointee, trivial};
    } else if (*kind == "opaque") {
      desc.detail = OpaqueType{};
    } else if (*kind == "void") {
      desc.detail = VoidType{};
    } else if (*kind == "funcptr") {
      FuncPtrType fp;
      auto ret = RefType(reg, t, "ret", context);
      if (!ret.ok()) return ret.status();
      fp.ret = *ret;
      for (const auto& p : t.value("params", json::array())) {
        if (!p.is_string()) return SchemaError(absl::StrCat(context, ": params must be type names"));
        auto pid = reg.Intern(p.get<std::string>());
        if (!pid.ok()) {
          return absl::InvalidArgumentError(
              absl::StrCat("dangling type reference '", p.get<std::string>(), "' in ", context));
        }
        fp.params.push_back(*pid);
      }
      desc.detail = fp;
    } else {
      return SchemaError(absl::StrCat(context, ": unknown kind '", *kind, "'"));
    }
    if (auto st = reg.Define(id, std::move(desc)); !st.ok()) return st;
  }

  std::set<TypeId> pending;
  for (auto [id, tp] : records) pending.insert(id);
  while (!records.empty()) {
    size_t before = records.size();
    for (auto it = records.begin(); it != records.end();) {
      auto [id, tp] = *it;
      const json& t = *tp;
      std::string context = absl::StrCat("type '", reg.Get(id).name, "'");
      const json& fields = t.value("fields", json::array());
      if (!fields.is_array()) return SchemaError(absl::StrCat(context, ": fields must be an array"));
      RecordType rec;
      bool ready = true;
      uint64_t cursor = 0;
      std::set<std::string> names;
      for (const auto& f : fields) {
        auto fname = GetString(f, "name");
        if (!fname.ok()) return fname.status();
        if (!names.insert(*fname).second) {
          return SchemaError(absl::StrCat(context, ": duplicate field '", *fname, "'"));
        }
        auto ftype = RefType(reg, f, "type", context);
        if (!ftype.ok()) return ftype.status();
        // Fields held by value must already have a layout.
        TypeId base = reg.Resolve(*ftype);
        while (reg.Get(base).kind() == TypeKind::kArray) base = reg.Resolve(reg.Get(base).array().element);
        if (pending.contains(base)) {
          ready = false;
          break;
        }
        auto size = reg.LayoutSize(*ftype);
        if (!size.ok()) {
          return absl::InvalidArgumentError(absl::StrCat(context, ": field '", *fname, "': ",
                                                         size.status().message()));
        }
        uint64_t offset = cursor;
        if (auto o = f.find("offset"); o != f.end()) {
          if (!o->is_number_unsigned()) return SchemaError(absl::StrCat(context, ": bad offset"));
          offset = o->get<uint64_t>();
        }
        rec.fields.push_back(RecordField{*fname, *ftype, offset});
        cursor = offset + *size;
      }
      if (!ready) {
        ++it;
        continue;
      }
      rec.size = cursor;
      if (auto s = t.find("size"); s != t.end()) {
        if (!s->is_number_unsigned()) return SchemaError(absl::StrCat(context, ": bad size"));
        rec.size = s->get<uint64_t>();
      }
      if (auto st = reg.Define(id, TypeDesc{"", std::move(rec)}); !st.ok()) return st;
      pending.erase(id);
      it = records.erase(it);
    }
    if (records.size() == before) {
      return absl::InvalidArgumentError(absl::StrCat(
          "type '", reg.Get(records.front().first).name, "' contains itself by value"));
    }
  }

  std::vector<FuncSig> sigs;
  for (const auto& f : functions) {
    if (!f.is_object()) return SchemaError("function entry is not an object");
    auto name = GetString(f, "name");
    if (!name.ok()) return name.status();
    std::string context = absl::StrCat("function '", *name, "'");
    FuncSig sig;
    sig.name = *name;
    auto ret = RefType(reg, f, "ret", context);
    if (!ret.ok()) return ret.status();
    sig.ret = *ret;
    const json& params = f.value("params", json::array());
    if (!params.is_array()) return SchemaError(absl::StrCat(context, ": params must be an array"));
    for (const auto& p : params) {
      auto pname = GetString(p, "name");
      if (!pname.ok()) return pname.status();
      auto ptype = RefType(reg, p, "type", context);
      if (!ptype.ok()) return ptype.status();
      sig.params.push_back(Param{*pname, *ptype});
    }
    sigs.push_back(std::move(sig));
  }
  return Manifest::Build(*std::move(library), std::move(reg), std::move(sigs));
}

absl::StatusOr<Manifest> LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open manifest '", path, "'"));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseManifest(buf.str());
}

}  // namespace apifuzz
