#pragma once

// Success-rate tracking and the optimistic/pessimistic switch.

#include "types.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>

namespace molcap {

struct AdaptConfig
{
    std::size_t w_local = 20;
    std::size_t w_remote = 20;
    // Weight of the local rate in the overall mean; remote samples share the rest.
    double local_weight = 0.3;
    // Switch threshold s in (0, 1].
    double threshold = 0.7;

    void validate() const
    {
        if (w_local == 0)
        {
            throw std::invalid_argument("w_local must be at least 1");
        }
        if (!(local_weight >= 0.0 && local_weight <= 1.0))
        {
            throw std::invalid_argument("local_weight must lie in [0, 1]");
        }
        if (!(threshold > 0.0 && threshold <= 1.0))
        {
            throw std::invalid_argument("threshold must lie in (0, 1]");
        }
    }
};

// Optimistic iff sigma^r >= s (inclusive).
inline RequestType choose_protocol(double sigma, std::size_t r, double s)
{
    if (r == 0)
    {
        throw std::invalid_argument("choose_protocol: arity must be at least 1");
    }
    return std::pow(sigma, static_cast<double>(r)) >= s ? RequestType::optimistic : RequestType::pessimistic;
}

class SuccessTracker
{
public:
    explicit SuccessTracker(AdaptConfig cfg = {}) : m_cfg(cfg) { m_cfg.validate(); }

    const AdaptConfig& config() const noexcept { return m_cfg; }

    void record_outcome(bool success)
    {
        if (m_local.size() == m_cfg.w_local)
        {
            m_successes -= m_local.front() ? 1 : 0;
            m_local.pop_front();
        }
        m_local.push_back(success);
        m_successes += success ? 1 : 0;
    }

    void record_remote_sigma(double sigma)
    {
        if (!(sigma >= 0.0 && sigma <= 1.0))
        {
            throw std::out_of_range("record_remote_sigma: " + std::to_string(sigma) + " outside [0, 1]");
        }
        if (m_cfg.w_remote == 0)
        {
            return;
        }
        if (m_remote.size() == m_cfg.w_remote)
        {
            m_remote.pop_front();
        }
        m_remote.push_back(sigma);
    }

    // 1.0 before any attempt has finished.
    double sigma_local() const noexcept
    {
        return m_local.empty() ? 1.0 : static_cast<double>(m_successes) / static_cast<double>(m_local.size());
    }

    double sigma_overall() const noexcept
    {
        if (m_remote.empty())
        {
            return sigma_local();
        }
        const double remote = std::accumulate(m_remote.begin(), m_remote.end(), 0.0) /
                              static_cast<double>(m_remote.size());
        return m_cfg.local_weight * sigma_local() + (1.0 - m_cfg.local_weight) * remote;
    }

    RequestType choose_protocol(std::size_t r) const { return molcap::choose_protocol(sigma_overall(), r, m_cfg.threshold); }

    const std::deque<bool>& local_history() const noexcept { return m_local; }
    const std::deque<double>& remote_sigmas() const noexcept { return m_remote; }

private:
    AdaptConfig m_cfg;
    std::deque<bool> m_local;
    std::deque<double> m_remote;
    std::size_t m_successes = 0;
};

} // namespace molcap
