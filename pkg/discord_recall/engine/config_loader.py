import configparser
import json
from dataclasses import dataclass, field
from pathlib import Path

from .games import ExtensiveGame, GameParseError, game_from_dict, game_to_dict
from .measures import GridSpec
from .qstate import DensityMatrix, StateParseError, state_from_dict, state_to_dict


def _read_json(path: str | Path, error: type[ValueError]):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise error(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise error(f"{path} is not valid JSON: {exc}") from exc


def load_state(path: str | Path) -> DensityMatrix:
    """Read a ``{"dim", "re", "im"}`` state document.

    Unreadable files, invalid JSON and shape errors raise
    :class:`StateParseError`; the physical checks are left to
    :func:`qstate.validate`.
    """
    return state_from_dict(_read_json(path, StateParseError))


def write_state(rho: DensityMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho), indent=2, sort_keys=True) + "\n")


def load_game(path: str | Path) -> ExtensiveGame:
    """Read a ``{"stages", "information_sets", "payoff"}`` game document."""
    return game_from_dict(_read_json(path, GameParseError))


def write_game(game: ExtensiveGame, path: str | Path) -> None:
    data = game_to_dict(game)
    if game.name:
        data["name"] = game.name
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class Defaults:
    """Typed view of ``config.ini``; missing keys keep these values."""

    grid: GridSpec = field(default_factory=GridSpec)
    seed: int = 1
    plays: int = 100_000
    streams: int = 1
    sweep_kind: str = "depolarizing"
    sweep_steps: int = 21
    sweep_subsystems: str = "AB"
    grid_steps: int = 101


def load_defaults(path: str | Path | None) -> Defaults:
    """Parse the ``[analysis]``, ``[simulation]``, ``[sweep]`` and ``[games]``
    sections.  A missing file yields the built-in defaults."""
    base = Defaults()
    if path is None or not Path(path).is_file():
        return base
    cp = configparser.ConfigParser()
    cp.read(path)

    def get(section: str, key: str, conv, fallback):
        if cp.has_section(section) and key in cp[section]:
            try:
                return conv(cp[section][key])
            except ValueError as exc:
                raise ValueError(f"{path}: [{section}] {key}: {exc}") from exc
        return fallback

    grid = GridSpec(
        theta_points=get("analysis", "theta_points", int, base.grid.theta_points),
        phi_points=get("analysis", "phi_points", int, base.grid.phi_points),
        min_rounds=get("analysis", "min_rounds", int, base.grid.min_rounds),
        angle_tol=get("analysis", "angle_tol", float, base.grid.angle_tol),
        workers=get("analysis", "workers", int, base.grid.workers),
    )
    return Defaults(
        grid=grid,
        seed=get("simulation", "seed", int, base.seed),
        plays=get("simulation", "plays", int, base.plays),
        streams=get("simulation", "streams", int, base.streams),
        sweep_kind=get("sweep", "kind", str, base.sweep_kind),
        sweep_steps=get("sweep", "steps", int, base.sweep_steps),
        sweep_subsystems=get("sweep", "subsystems", str, base.sweep_subsystems),
        grid_steps=get("games", "grid_steps", int, base.grid_steps),
    )
