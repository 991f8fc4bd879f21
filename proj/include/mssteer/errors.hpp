// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mssteer {

// Base class for all library errors.
struct ms_error : std::runtime_error {
    explicit ms_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text (PDB, CSV, JSON schema violations).
struct parse_error : ms_error {
    using ms_error::ms_error;
};

// A ResidueRef, chain or atom could not be resolved against a Structure.
struct resolution_error : ms_error {
    using ms_error::ms_error;
};

// Invalid configuration value or unknown config key.
struct config_error : ms_error {
    using ms_error::ms_error;
};

// Atom element missing from the van der Waals radius table.
struct unknown_element_error : ms_error {
    using ms_error::ms_error;
};

// Superposition input is too small or rank-deficient.
struct degeneracy_error : ms_error {
    using ms_error::ms_error;
};

// Residue numbering does not correspond between two structures.
struct correspondence_error : ms_error {
    using ms_error::ms_error;
};

// Non-finite coordinates encountered during sampling.
struct divergence_error : ms_error {
    using ms_error::ms_error;
};

// Reference structure defines no interface at the requested cutoff.
struct no_interface_error : ms_error {
    using ms_error::ms_error;
};

}  // namespace mssteer
