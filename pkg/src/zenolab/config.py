"""Experiment configuration: TOML parsing, catalogs, and descriptors.

A config names a channel, a generator, a truncation dimension, an initial
state, and the Zeno-run parameters.  Channels and generators are addressed
by catalog name plus keyword parameters so that runs are reproducible from
the config file alone.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib as toml_reader
except ImportError:  # Python < 3.11
    import tomli as toml_reader

from . import channels as ch
from .errors import ValidationError
from .linalg import kron_sandwich, vec
from .semigroup import GklsGenerator, Superoperator, lindbladian
from .zeno import ZenoRunConfig


def _level_mix_state(d, levels=3, coherence=0.1):
    """Uniform mixture of the lowest `levels` Fock states plus a real
    0-1 coherence; the sigma used in the error-decay experiment."""
    if levels > d:
        raise ValidationError(f"levels {levels} exceeds dimension {d}")
    sigma = np.zeros((d, d), dtype=complex)
    for j in range(levels):
        sigma[j, j] = 1.0 / levels
    if levels >= 2:
        sigma[0, 1] = sigma[1, 0] = coherence
    return sigma


def build_state(desc, d):
    """Build a density matrix from a descriptor dict with a `kind` key."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    if kind == "fock":
        n = int(desc.pop("n", 0))
        if not 0 <= n < d:
            raise ValidationError(f"fock level {n} outside dimension {d}")
        rho = np.zeros((d, d), dtype=complex)
        rho[n, n] = 1.0
    elif kind == "coherent":
        alpha = complex(desc.pop("alpha", 0.0))
        psi = ch.coherent_state(alpha, d)
        rho = np.outer(psi, psi.conj())
    elif kind == "geometric":
        rho = ch.geometric_state(float(desc.pop("nu")), d)
    elif kind == "level_mix":
        rho = _level_mix_state(
            d, int(desc.pop("levels", 3)), float(desc.pop("coherence", 0.1))
        )
    elif kind == "maximally_mixed":
        rho = np.eye(d, dtype=complex) / d
    else:
        raise ValidationError(f"unknown state kind {kind!r}")
    if desc:
        raise ValidationError(f"unused state parameters: {sorted(desc)}")
    return rho


def _fixed_state_projector(sigma):
    d = sigma.shape[0]
    return Superoperator(np.outer(vec(sigma), vec(np.eye(d)).conj()), d)


CHANNEL_CATALOG = {
    "depolarizing": "mix with a fixed state: (1-p) rho + p tr(rho) sigma; "
    "params p, dim, plus a sigma state table (default maximally mixed)",
    "attenuator": "bosonic loss channel at damping time t; params t, dim",
    "oscillator_conjugation": "one oscillator period split in k conjugation "
    "steps; params k, omega (default 1.0), dim",
    "identity": "identity channel; params dim",
    "projective": "rank-one projective operation rho -> pi rho pi onto a "
    "state table (default ground); params dim + state table",
    "volterra": "discretized Volterra resolvent contraction (not a channel); "
    "params grid",
}

GENERATOR_CATALOG = {
    "none": "zero generator",
    "oscillator": "Hamiltonian generator -i[H, .] with H = omega (N + 1/2); "
    "params omega (default 1.0)",
    "qou": "quantum Ornstein-Uhlenbeck: jumps mu*a and lam*a+; params lam, mu",
    "jaynes_cummings": "damped Jaynes-Cummings: jumps mu*a, lam*a+, and the "
    "R, phi measurement pair; params mu, lam, r, phi",
    "emission_absorption": "number dephasing nu*N, decay mu*a, drive "
    "xi(a + a+); params nu, mu, xi",
    "two_photon": "two-photon absorption/emission with b = a^2; params "
    "kappa, mu, lam",
}


def build_channel(name, params, dim):
    """Instantiate a catalog channel as a Superoperator (or raw matrix)."""
    params = dict(params)
    trunc = ch.TruncationSpec(dim) if dim else None
    if name == "depolarizing":
        p = float(params.pop("p"))
        sigma_desc = params.pop("sigma", {"kind": "maximally_mixed"})
        sigma = build_state(sigma_desc, dim)
        out = ch.depolarizing(p, sigma)
    elif name == "attenuator":
        out = ch.attenuator(float(params.pop("t")), trunc).to_superoperator()
    elif name == "oscillator_conjugation":
        k = int(params.pop("k"))
        omega = float(params.pop("omega", 1.0))
        out = ch.oscillator_conjugation(k, omega, trunc)
    elif name == "identity":
        out = Superoperator.identity(dim)
    elif name == "projective":
        state_desc = params.pop("state", {"kind": "fock", "n": 0})
        pi = build_state(state_desc, dim)
        out = Superoperator(kron_sandwich(pi, pi), dim)
    elif name == "volterra":
        grid = int(params.pop("grid", dim or 256))
        matrix, _, _ = ch.volterra_contraction(grid)
        out = matrix
    else:
        raise ValidationError(
            f"unknown channel {name!r}; catalog: {sorted(CHANNEL_CATALOG)}"
        )
    if params:
        raise ValidationError(f"unused channel parameters: {sorted(params)}")
    return out


def build_generator(name, params, dim):
    """Instantiate a catalog generator as a Superoperator."""
    params = dict(params)
    trunc = ch.TruncationSpec(dim)
    if name == "none":
        out = Superoperator.zero(dim)
    elif name == "oscillator":
        omega = float(params.pop("omega", 1.0))
        h = omega * np.diag(np.arange(dim) + 0.5).astype(complex)
        out = lindbladian(GklsGenerator(dim, h, []))
    elif name == "qou":
        out = lindbladian(
            ch.qou_generator(float(params.pop("lam")), float(params.pop("mu")), trunc)
        )
    elif name == "jaynes_cummings":
        out = lindbladian(
            ch.jaynes_cummings_generator(
                float(params.pop("mu")),
                float(params.pop("lam")),
                float(params.pop("r")),
                float(params.pop("phi")),
                trunc,
            )
        )
    elif name == "emission_absorption":
        out = lindbladian(
            ch.emission_absorption_generator(
                float(params.pop("nu")),
                float(params.pop("mu")),
                float(params.pop("xi")),
                trunc,
            )
        )
    elif name == "two_photon":
        out = lindbladian(
            ch.two_photon_generator(
                float(params.pop("kappa")),
                float(params.pop("mu")),
                float(params.pop("lam")),
                trunc,
            )
        )
    else:
        raise ValidationError(
            f"unknown generator {name!r}; catalog: {sorted(GENERATOR_CATALOG)}"
        )
    if params:
        raise ValidationError(f"unused generator parameters: {sorted(params)}")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    dim: int
    channel: dict
    generator: dict
    initial_state: dict
    total_time: float
    n_grid: tuple
    limit_mode: str = "theorem1"
    beta: float = 1.0 / 3.0
    seed: int = 0
    output_dir: str = "runs"

    def __post_init__(self):
        if not self.name:
            raise ValidationError("experiment name must be nonempty")
        if self.dim < 2:
            raise ValidationError("dim must be >= 2")
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))

    def to_dict(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "channel": self.channel,
            "generator": self.generator,
            "initial_state": self.initial_state,
            "total_time": self.total_time,
            "n_grid": list(self.n_grid),
            "limit_mode": self.limit_mode,
            "beta": self.beta,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def build_run(self):
        """Materialize the ZenoRunConfig (validates the physical inputs)."""
        channel = build_channel(
            self.channel.get("name"),
            {k: v for k, v in self.channel.items() if k != "name"},
            self.dim,
        )
        generator = build_generator(
            self.generator.get("name", "none"),
            {k: v for k, v in self.generator.items() if k != "name"},
            self.dim,
        )
        rho0 = build_state(self.initial_state, self.dim)
        return ZenoRunConfig(
            channel=channel,
            generator=generator,
            total_time=self.total_time,
            n_grid=self.n_grid,
            initial_state=rho0,
            limit_mode=self.limit_mode,
            beta=self.beta,
        )


def load_config(path):
    """Read an ExperimentConfig from a TOML file."""
    with open(path, "rb") as fh:
        doc = toml_reader.load(fh)
    try:
        run = doc.get("run", {})
        return ExperimentConfig(
            name=doc["name"],
            dim=int(doc["dim"]),
            channel=doc["channel"],
            generator=doc.get("generator", {"name": "none"}),
            initial_state=doc["initial_state"],
            total_time=float(run.get("total_time", 1.0)),
            n_grid=run.get("n_grid", []),
            limit_mode=run.get("limit_mode", "theorem1"),
            beta=float(run.get("beta", 1.0 / 3.0)),
            seed=int(doc.get("seed", 0)),
            output_dir=doc.get("output_dir", "runs"),
        )
    except KeyError as exc:
        raise ValidationError(f"config is missing required key {exc}") from exc


def parse_channel_spec(spec):
    """Parse a 'name:key=val,key=val' channel spec string.

    Values parse as int, then float, then stay strings.  The dim key is
    split off; remaining pairs become channel parameters.
    """
    name, _, rest = spec.partition(":")
    name = name.strip()
    params = {}
    if rest.strip():
        for piece in rest.split(","):
            key, sep, value = piece.partition("=")
            if not sep:
                raise ValidationError(f"malformed channel spec piece {piece!r}")
            key = key.strip()
            value = value.strip()
            for cast in (int, float):
                try:
                    value = cast(value)
                    break
                except ValueError:
                    continue
            params[key] = value
    dim = int(params.pop("dim", 0)) or None
    return name, params, dim
