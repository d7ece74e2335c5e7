#pragma once

// Static description of the bundled systems, in stable order.

#include <string>
#include <vector>

namespace mlab {

struct SystemInfo {
  std::string id;
  std::string description;
  std::vector<std::string> families;
  std::vector<std::string> parameters;
};

inline const std::vector<SystemInfo>& system_registry() {
  static const std::vector<SystemInfo> systems{
      {"duffing", "forced Duffing oscillator, state (x1, x2, theta)",
       {"q+", "q-", "outer", "hat", "hom+", "hom-"},
       {"a", "beta", "delta", "omega"}},
      {"pendula", "two pendula coupled through a harmonic oscillator, state (x1..x4, I, theta)",
       {"hom++", "hom+-", "hom-+", "hom--"},
       {"omega0", "I"}},
      {"rigidbody", "rigid body with periodic torques, state (w1, w2, w3, theta)",
       {"p1+", "p1-", "p2+", "p2-", "p3+", "p3-"},
       {"I1", "I2", "I3", "beta0", "beta1", "beta2", "beta3", "T", "c"}},
      {"beam", "three-mode buckled beam, state (y1..y6)",
       {"gamma1", "gamma2"},
       {"omega1", "omega2", "beta1", "beta2", "c"}},
  };
  return systems;
}

}  // namespace mlab
