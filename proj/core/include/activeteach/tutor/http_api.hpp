#pragma once

#include <memory>
#include <string>

#include "activeteach/tutor/service.hpp"

namespace activeteach::tutor {

/**
 * JSON over HTTP front end for a TutorService. Endpoint reference: docs/http_api.md.
 *
 * bind() and run() are split so callers can report an occupied port before blocking.
 */
class HttpApi {
public:
    explicit HttpApi(TutorService& service);
    ~HttpApi();
    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Returns the bound port (useful with port 0). Throws Error when binding fails.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Blocks.
    void run();
    /// Safe from any thread, including signal-driven shutdown threads.
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace activeteach::tutor
