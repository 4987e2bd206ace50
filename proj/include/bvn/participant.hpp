#ifndef BVN_PARTICIPANT_HPP
#define BVN_PARTICIPANT_HPP

#include <map>
#include <stdexcept>
#include <string>

namespace bvn {

enum class Role { Vehicle, RSU, Controller };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::Vehicle: return "Vehicle";
        case Role::RSU: return "RSU";
        case Role::Controller: return "Controller";
    }
    return "?";
}

/// Every role holds exactly {ADD, READ}. There is no MODIFY or DELETE
/// permission anywhere in the system; the admin flag grants registry
/// administration only, never record mutation.
struct Participant {
    std::string id;
    Role role = Role::Vehicle;
    bool is_admin = false;

    static constexpr bool can_add = true;
    static constexpr bool can_read = true;
};

struct DuplicateId : std::invalid_argument {
    explicit DuplicateId(const std::string& id)
        : std::invalid_argument("participant id already registered: " + id) {}
};

struct UnregisteredActor : std::invalid_argument {
    explicit UnregisteredActor(const std::string& id)
        : std::invalid_argument("actor not registered: " + id) {}
};

class ParticipantRegistry {
public:
    const Participant& register_participant(const std::string& id, Role role) {
        if (participants_.count(id) != 0) throw DuplicateId(id);
        Participant p;
        p.id = id;
        p.role = role;
        p.is_admin = (role == Role::Controller);
        return participants_.emplace(id, std::move(p)).first->second;
    }

    bool is_registered(const std::string& id) const { return participants_.count(id) != 0; }

    const Participant& require(const std::string& id) const {
        auto it = participants_.find(id);
        if (it == participants_.end()) throw UnregisteredActor(id);
        return it->second;
    }

    std::size_t size() const { return participants_.size(); }

private:
    std::map<std::string, Participant> participants_;
};

}  // namespace bvn

#endif  // BVN_PARTICIPANT_HPP
