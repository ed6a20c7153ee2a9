#include "vcei/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string>

namespace vcei::log {

spdlog::logger& logger() {
    static const std::shared_ptr<spdlog::logger> instance = [] {
        auto l = std::make_shared<spdlog::logger>("vcei", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("[%l] %v");
        spdlog::level::level_enum level = spdlog::level::warn;
        if (const char* env = std::getenv("VCEI_LOG")) {
            level = spdlog::level::from_str(env);
        }
        l->set_level(level);
        return l;
    }();
    return *instance;
}

}  // namespace vcei::log
