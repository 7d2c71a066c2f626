#include "manifest.hpp"

#include <yaml-cpp/yaml.h>

#include <sstream>

#include "strutil.hpp"

namespace wlmbridge {

namespace {

constexpr const char* kObjectKind = "TorqueJob";
constexpr std::size_t kMaxNameLength = 63;

void validate_object_name(const std::string& name) {
    if (name.empty()) fail(Err::missing_field, "manifest has no metadata.name");
    if (name.size() > kMaxNameLength)
        fail(Err::malformed_manifest, "object name '" + name + "' exceeds 63 characters");
    for (unsigned char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok)
            fail(Err::malformed_manifest,
                 "object name '" + name + "' may contain only lowercase alphanumerics and hyphens");
    }
}

// Exactly one trailing newline, regardless of how the block scalar was
// chomped in the source.
std::string normalize_script(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    s.push_back('\n');
    return s;
}

std::string scalar_at(const YAML::Node& node, const char* what) {
    if (!node || !node.IsScalar())
        fail(Err::malformed_manifest, std::string(what) + " must be a scalar value");
    return node.as<std::string>();
}

ResultsSpec parse_results_clause(const YAML::Node& node) {
    ResultsSpec spec;
    if (!node.IsMap()) fail(Err::malformed_manifest, "results clause must be a map");

    if (!node["from"]) fail(Err::missing_field, "results clause has no from path");
    spec.from_path = scalar_at(node["from"], "results.from");
    if (spec.from_path.empty()) fail(Err::missing_field, "results.from is empty");
    if (spec.from_path.back() == '/' ||
        spec.from_path.find_first_of("*?[") != std::string::npos)
        fail(Err::malformed_manifest, "results.from must name a single file: " + spec.from_path);

    const YAML::Node mount = node["mount"];
    if (!mount || !mount.IsMap()) fail(Err::missing_field, "results clause has no mount");
    if (mount["name"]) spec.mount_name = scalar_at(mount["name"], "results.mount.name");

    const YAML::Node host = mount["hostPath"];
    if (!host || !host.IsMap()) fail(Err::missing_field, "results.mount has no hostPath");
    if (!host["path"]) fail(Err::missing_field, "results.mount.hostPath has no path");
    spec.host_path = scalar_at(host["path"], "results.mount.hostPath.path");
    if (spec.host_path.empty()) fail(Err::missing_field, "results.mount.hostPath.path is empty");
    if (!host["type"]) fail(Err::missing_field, "results.mount.hostPath has no type");
    spec.create_mode = create_mode_from_string(scalar_at(host["type"], "results.mount.hostPath.type"));
    return spec;
}

} // namespace

const char* to_string(CreateMode m) {
    return m == CreateMode::Directory ? "Directory" : "DirectoryOrCreate";
}

CreateMode create_mode_from_string(const std::string& s) {
    if (s == "DirectoryOrCreate") return CreateMode::DirectoryOrCreate;
    if (s == "Directory") return CreateMode::Directory;
    fail(Err::malformed_manifest, "unknown hostPath type '" + s + "'");
}

JobManifest parse_manifest(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(Err::malformed_manifest, std::string("manifest is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) fail(Err::malformed_manifest, "manifest root must be a map");

    JobManifest m;
    try {
        if (root["apiVersion"]) {
            m.api_version = scalar_at(root["apiVersion"], "apiVersion");
            if (m.api_version.empty())
                fail(Err::malformed_manifest, "apiVersion must be non-empty when present");
        }

        m.kind = root["kind"] ? scalar_at(root["kind"], "kind") : "";
        if (m.kind != kObjectKind)
            fail(Err::unsupported_kind,
                 "unsupported object kind '" + m.kind + "', expected '" + kObjectKind + "'");

        const YAML::Node metadata = root["metadata"];
        if (!metadata || !metadata.IsMap() || !metadata["name"])
            fail(Err::missing_field, "manifest has no metadata.name");
        m.name = scalar_at(metadata["name"], "metadata.name");
        validate_object_name(m.name);

        const YAML::Node spec = root["spec"];
        if (!spec || !spec.IsMap() || !spec["batch"])
            fail(Err::missing_field, "manifest has no spec.batch script");
        m.batch_script = normalize_script(scalar_at(spec["batch"], "spec.batch"));
        if (trim(m.batch_script).empty())
            fail(Err::missing_field, "spec.batch script is empty");

        if (root["results"]) m.results = parse_results_clause(root["results"]);
    } catch (const YAML::Exception& e) {
        fail(Err::malformed_manifest, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

std::string serialize_manifest(const JobManifest& m) {
    // The literal block emitter re-adds the single trailing newline on parse.
    std::string script = m.batch_script;
    while (!script.empty() && script.back() == '\n') script.pop_back();

    YAML::Emitter out;
    out << YAML::BeginMap;
    if (!m.api_version.empty()) out << YAML::Key << "apiVersion" << YAML::Value << m.api_version;
    out << YAML::Key << "kind" << YAML::Value << m.kind;
    out << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap
        << YAML::Key << "name" << YAML::Value << m.name << YAML::EndMap;
    out << YAML::Key << "spec" << YAML::Value << YAML::BeginMap
        << YAML::Key << "batch" << YAML::Value << YAML::Literal << script << YAML::EndMap;
    if (m.results) {
        out << YAML::Key << "results" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "from" << YAML::Value << m.results->from_path;
        out << YAML::Key << "mount" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << m.results->mount_name;
        out << YAML::Key << "hostPath" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "path" << YAML::Value << m.results->host_path;
        out << YAML::Key << "type" << YAML::Value << to_string(m.results->create_mode);
        out << YAML::EndMap << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::int64_t parse_walltime(const std::string& text) {
    auto bad = [&]() { fail(Err::malformed_walltime, "malformed walltime '" + text + "'"); };
    auto first = text.find(':');
    auto second = text.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        text.find(':', second + 1) != std::string::npos)
        bad();
    std::string hh = text.substr(0, first);
    std::string mm = text.substr(first + 1, second - first - 1);
    std::string ss = text.substr(second + 1);
    if (!is_digits(hh) || mm.size() != 2 || !is_digits(mm) || ss.size() != 2 || !is_digits(ss))
        bad();
    std::int64_t h = std::stoll(hh);
    int m = std::stoi(mm);
    int s = std::stoi(ss);
    if (m > 59 || s > 59) bad();
    return h * 3600 + m * 60 + s;
}

std::string format_walltime(std::int64_t seconds) {
    if (seconds < 0) fail(Err::invalid_arg, "walltime seconds must be non-negative");
    std::int64_t h = seconds / 3600;
    int m = static_cast<int>((seconds % 3600) / 60);
    int s = static_cast<int>(seconds % 60);
    std::ostringstream out;
    out << (h < 10 ? "0" : "") << h << ':' << (m < 10 ? "0" : "") << m << ':'
        << (s < 10 ? "0" : "") << s;
    return out.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

// Applies one `#PBS` line. Returns false when the line is a well-formed
// directive we do not structure (the caller keeps it verbatim).
bool apply_pbs_directive(const std::string& rest, PbsDirectives& d) {
    std::vector<std::string> tokens = split_ws(rest);
    if (tokens.empty()) return false;

    const std::string& flag = tokens[0];
    if (flag == "-l") {
        if (tokens.size() < 2)
            fail(Err::malformed_directive, "#PBS -l requires a key=value argument");
        if (tokens.size() > 2) return false;

        // -l takes a comma-separated resource list; structure the line only
        // when every entry is one we cover, otherwise keep it whole.
        struct Pending {
            std::optional<std::int64_t> walltime;
            std::optional<int> nodes;
        } pending;
        std::istringstream entries(tokens[1]);
        std::string entry;
        while (std::getline(entries, entry, ',')) {
            auto eq = entry.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 >= entry.size())
                fail(Err::malformed_directive, "#PBS -l entry '" + entry + "' is not key=value");
            std::string key = entry.substr(0, eq);
            std::string value = entry.substr(eq + 1);
            if (key == "walltime") {
                pending.walltime = parse_walltime(value);
            } else if (key == "nodes") {
                if (!is_digits(value)) return false; // node-spec form we do not cover
                long n = std::stol(value);
                if (n < 1)
                    fail(Err::malformed_directive, "#PBS -l nodes must be at least 1");
                pending.nodes = static_cast<int>(n);
            } else {
                return false;
            }
        }
        if (pending.walltime) d.walltime_seconds = pending.walltime;
        if (pending.nodes) d.node_count = pending.nodes;
        return true;
    }

    if (flag == "-e" || flag == "-o" || flag == "-q") {
        auto at = rest.find(flag);
        std::string value = trim(rest.substr(at + flag.size()));
        if (value.empty())
            fail(Err::malformed_directive, "#PBS " + flag + " requires a value");
        if (flag == "-e") d.stderr_path = value;
        else if (flag == "-o") d.stdout_path = value;
        else d.queue_name = value;
        return true;
    }

    return false;
}

} // namespace

PbsDirectives parse_pbs_directives(const std::string& batch_script) {
    PbsDirectives d;
    for (const std::string& line : split_lines(batch_script)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.rfind("#!", 0) == 0) continue;
        if (t[0] != '#') break; // first executable line ends the prologue
        bool is_pbs = t.rfind("#PBS", 0) == 0 &&
                      (t.size() == 4 || t[4] == ' ' || t[4] == '\t');
        if (!is_pbs) continue;
        if (!apply_pbs_directive(t.substr(4), d)) d.raw_directives.push_back(line);
    }
    return d;
}

std::string render_batch_script(const JobManifest& m) {
    std::string script = m.batch_script;
    if (script.empty() || script.back() != '\n') script.push_back('\n');
    return script;
}

std::string expand_variables(const std::string& path, const std::string& home) {
    if (home.empty() || home.front() != '/')
        fail(Err::invalid_arg, "home must be an absolute path, got '" + home + "'");

    auto is_name_start = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    auto is_name_char = [&](char c) { return is_name_start(c) || (c >= '0' && c <= '9'); };

    std::string out;
    out.reserve(path.size());
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] != '$') {
            out.push_back(path[i++]);
            continue;
        }
        std::string name;
        std::size_t next;
        if (i + 1 < path.size() && path[i + 1] == '{') {
            auto close = path.find('}', i + 2);
            if (close == std::string::npos)
                fail(Err::unknown_variable, "unterminated ${ in '" + path + "'");
            name = path.substr(i + 2, close - i - 2);
            next = close + 1;
        } else if (i + 1 < path.size() && is_name_start(path[i + 1])) {
            std::size_t end = i + 1;
            while (end < path.size() && is_name_char(path[end])) ++end;
            name = path.substr(i + 1, end - i - 1);
            next = end;
        } else {
            out.push_back(path[i++]); // lone '$'
            continue;
        }
        if (name != "HOME")
            fail(Err::unknown_variable, "unsupported variable $" + name + " in '" + path + "'");
        out += home;
        i = next;
    }
    return out;
}

} // namespace wlmbridge
