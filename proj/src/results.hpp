#pragma once

#include <string>
#include <vector>

#include "manifest.hpp"

namespace wlmbridge {

class AdapterContract;

// Transfer-task analog: copies the job's declared output file from the
// cluster side into the user's host path, expanding $HOME on both ends.
// Returns the destination paths written. Throws SourceMissing when the job
// left no output and DestinationUnwritable when the host path cannot be
// used (Directory mode requires it to pre-exist).
std::vector<std::string> collect_results(const ResultsSpec& spec,
                                         const std::string& home,
                                         AdapterContract& adapter);

} // namespace wlmbridge
