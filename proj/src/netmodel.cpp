#include "aggen/netmodel.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aggen/errors.hpp"

namespace aggen {

FactId FactCatalog::intern(std::string_view s) {
    if (s.empty()) {
        throw ValidationError("cannot intern empty fact string");
    }
    auto it = index_.find(std::string(s));
    if (it != index_.end()) {
        return it->second;
    }
    FactId id = static_cast<FactId>(entries_.size());
    entries_.emplace_back(s);
    index_.emplace(entries_.back(), id);
    return id;
}

std::optional<FactId> FactCatalog::find(std::string_view s) const {
    auto it = index_.find(std::string(s));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::string& FactCatalog::name(FactId id) const {
    return entries_.at(id);
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.code << ": " << v.message << "\n";
    }
    return os.str();
}

ValidationReport validate_spec(const NetworkSpec& spec) {
    ValidationReport report;
    auto add = [&report](std::string code, std::string message) {
        report.violations.push_back({std::move(code), std::move(message)});
    };

    const FactId limit = static_cast<FactId>(spec.catalog.size());
    auto check_facts = [&](const FactSet& facts, const std::string& where) {
        for (FactId f : facts) {
            if (f >= limit) {
                add("dangling-fact",
                    where + " references fact id " + std::to_string(f) + " beyond catalog size " +
                        std::to_string(limit));
            }
        }
    };

    if (spec.initial.empty()) {
        add("empty-initial", "initial fact set is empty");
    }
    check_facts(spec.initial, "initial set");

    for (std::size_t i = 0; i < spec.exploits.size(); ++i) {
        const Exploit& e = spec.exploits[i];
        const std::string where = "exploit '" + e.label + "' (#" + std::to_string(i) + ")";
        if (e.id != static_cast<ExploitId>(i)) {
            add("exploit-id", where + " has id " + std::to_string(e.id) +
                                  " but sits at position " + std::to_string(i));
        }
        if (e.post.empty()) {
            add("empty-postconditions", where + " has empty postconditions");
        }
        if (sets_intersect(e.pre, e.post)) {
            add("pre-post-overlap", where + " has overlapping pre- and postconditions");
        }
        check_facts(e.pre, where + " preconditions");
        check_facts(e.post, where + " postconditions");
    }

    return report;
}

void require_valid(const NetworkSpec& spec) {
    ValidationReport report = validate_spec(spec);
    if (!report.ok()) {
        throw ValidationError("spec validation failed:\n" + report.to_string());
    }
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

void fnv_u32(std::uint64_t& h, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 24)};
    fnv_bytes(h, buf, sizeof(buf));
}

void fnv_string(std::uint64_t& h, const std::string& s) {
    fnv_u32(h, static_cast<std::uint32_t>(s.size()));
    fnv_bytes(h, s.data(), s.size());
}

void fnv_facts(std::uint64_t& h, const FactSet& facts) {
    fnv_u32(h, static_cast<std::uint32_t>(facts.size()));
    for (FactId f : facts) {
        fnv_u32(h, f);
    }
}

} // namespace

std::uint64_t spec_checksum(const NetworkSpec& spec) {
    std::uint64_t h = kFnvOffset;
    fnv_u32(h, static_cast<std::uint32_t>(spec.catalog.size()));
    for (const auto& entry : spec.catalog.entries()) {
        fnv_string(h, entry);
    }
    fnv_u32(h, static_cast<std::uint32_t>(spec.exploits.size()));
    for (const Exploit& e : spec.exploits) {
        fnv_u32(h, e.id);
        fnv_facts(h, e.pre);
        fnv_facts(h, e.post);
    }
    fnv_facts(h, spec.initial);
    return h;
}

namespace {

FactSet intern_fact_list(FactCatalog& catalog, const nlohmann::json& arr,
                         const std::string& where) {
    if (!arr.is_array()) {
        throw ValidationError(where + " must be an array of fact strings");
    }
    std::vector<FactId> ids;
    ids.reserve(arr.size());
    for (const auto& item : arr) {
        if (!item.is_string()) {
            throw ValidationError(where + " contains a non-string fact");
        }
        ids.push_back(catalog.intern(item.get<std::string>()));
    }
    return make_fact_set(std::move(ids));
}

} // namespace

NetworkSpec load_spec_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("spec document must be a JSON object");
    }

    NetworkSpec spec;

    if (doc.contains("assets")) {
        for (const auto& a : doc["assets"]) {
            Asset asset;
            asset.name = a.value("name", "");
            asset.kind = a.value("kind", "");
            if (asset.name.empty()) {
                throw ValidationError("asset entry missing 'name'");
            }
            spec.assets.push_back(std::move(asset));
        }
    }

    // Interning order is part of the file contract: facts, initial, then
    // exploits in list order with pre before post.
    if (doc.contains("facts")) {
        for (const auto& f : doc["facts"]) {
            if (!f.is_string()) {
                throw ValidationError("'facts' contains a non-string entry");
            }
            spec.catalog.intern(f.get<std::string>());
        }
    }

    if (!doc.contains("initial")) {
        throw ValidationError("spec document missing 'initial'");
    }
    spec.initial = intern_fact_list(spec.catalog, doc["initial"], "'initial'");

    if (!doc.contains("exploits")) {
        throw ValidationError("spec document missing 'exploits'");
    }
    ExploitId next_id = 0;
    for (const auto& e : doc["exploits"]) {
        Exploit ex;
        ex.id = next_id++;
        ex.label = e.value("label", "exploit-" + std::to_string(ex.id));
        ex.group = e.value("group", "");
        if (!e.contains("pre") || !e.contains("post")) {
            throw ValidationError("exploit '" + ex.label + "' missing 'pre' or 'post'");
        }
        ex.pre = intern_fact_list(spec.catalog, e["pre"], "exploit '" + ex.label + "' pre");
        ex.post = intern_fact_list(spec.catalog, e["post"], "exploit '" + ex.label + "' post");
        spec.exploits.push_back(std::move(ex));
    }

    return spec;
}

NetworkSpec load_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open spec file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_spec_json(buf.str());
}

std::vector<std::string> decode_facts(const FactCatalog& catalog, const FactSet& facts) {
    std::vector<std::string> out;
    out.reserve(facts.size());
    for (FactId f : facts) {
        out.push_back(catalog.name(f));
    }
    return out;
}

} // namespace aggen
