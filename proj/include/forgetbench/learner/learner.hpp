#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/types.hpp"
#include "forgetbench/data/streams.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace forgetbench {

// Bytes held by a learner. model_bytes counts trainable and fixed network
// parameters; aux_bytes counts everything else it keeps between sessions
// (stored examples, replay buffers, per-task heads, anchors).
struct MemoryLedger {
    std::size_t model_bytes = 0;
    std::size_t aux_bytes = 0;
};

inline constexpr double kBytesPerMegabyte = 1024.0 * 1024.0;

struct LearnerShape {
    int input_dim = 0;
    int num_classes = 0;
};

// Common contract of every incremental learner. Sessions must arrive as
// 1, 2, 3, ...; prediction is restricted to classes seen so far.
class Learner {
public:
    explicit Learner(LearnerShape shape)
        : shape_(shape), seen_(static_cast<std::size_t>(shape.num_classes), false) {
        if (shape.input_dim <= 0 || shape.num_classes <= 0) throw ConfigError("learner needs positive input and class counts");
    }
    virtual ~Learner() = default;
    Learner(const Learner&) = default;
    Learner& operator=(const Learner&) = default;

    virtual std::string id() const = 0;

    void train_session(const data::StudySession& session) {
        if (session.id != learned_ + 1) {
            throw ProtocolError(id() + ": expected session " + std::to_string(learned_ + 1) + ", got session " +
                                std::to_string(session.id));
        }
        if (session.dim() != shape_.input_dim) {
            throw ShapeError(id() + ": session " + std::to_string(session.id) + " has " +
                             std::to_string(session.dim()) + " features, learner expects " +
                             std::to_string(shape_.input_dim));
        }
        for (int y : session.train_y) {
            if (y < 0 || y >= shape_.num_classes) throw InputError(id() + ": label " + std::to_string(y) + " out of range");
            seen_[static_cast<std::size_t>(y)] = true;
        }
        learn(session);
        ++learned_;
    }

    Labels predict(const Matrix& x) const {
        require_trained();
        return infer(x);
    }

    // Task-aware prediction; only task-routed models use the id.
    virtual Labels predict_for_task(const Matrix& x, int task) const {
        (void)task;
        return predict(x);
    }

    virtual bool requires_task_id() const { return false; }
    virtual MemoryLedger memory() const = 0;

    int sessions_learned() const { return learned_; }
    const LearnerShape& shape() const { return shape_; }
    const std::vector<bool>& seen_classes() const { return seen_; }

protected:
    virtual void learn(const data::StudySession& session) = 0;
    virtual Labels infer(const Matrix& x) const = 0;

    void require_trained() const {
        if (learned_ == 0) throw StateError(id() + ": predict called before any session was learned");
    }

private:
    LearnerShape shape_;
    std::vector<bool> seen_;
    int learned_ = 0;
};

}  // namespace forgetbench
