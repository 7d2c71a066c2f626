#include "results.hpp"

#include <filesystem>
#include <fstream>

#include "wlm_adapter.hpp"

namespace fs = std::filesystem;

namespace wlmbridge {

std::vector<std::string> collect_results(const ResultsSpec& spec,
                                         const std::string& home,
                                         AdapterContract& adapter) {
    std::string source = expand_variables(spec.from_path, home);
    std::string dest_dir = expand_variables(spec.host_path, home);

    std::string bytes = adapter.read_file(source); // SourceMissing when absent

    std::error_code ec;
    if (spec.create_mode == CreateMode::DirectoryOrCreate) {
        fs::create_directories(dest_dir, ec);
        if (ec) fail(Err::destination_unwritable,
                     "cannot create destination directory " + dest_dir + ": " + ec.message());
    }
    if (!fs::is_directory(dest_dir, ec))
        fail(Err::destination_unwritable, "destination directory " + dest_dir + " does not exist");

    fs::path dest = fs::path(dest_dir) / fs::path(source).filename();
    std::ofstream out(dest, std::ios::binary | std::ios::trunc);
    if (!out) fail(Err::destination_unwritable, "cannot write " + dest.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) fail(Err::destination_unwritable, "short write to " + dest.string());

    return {dest.string()};
}

} // namespace wlmbridge
