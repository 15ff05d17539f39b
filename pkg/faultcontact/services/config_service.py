"""Run configuration: TOML or JSON text in, validated RunConfig and ProblemDefinition out."""

import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from faultcontact.core.errors import ConfigError
from faultcontact.models.config_models import RunConfig
from faultcontact.models.problem_models import FrictionParams, ProblemDefinition
from faultcontact.services.mesh_io_service import load_mesh
from faultcontact.services.mesh_service import build_from_spec

logger = logging.getLogger(__name__)


def _key_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def _config_error(exc: ValidationError, prefix: str = "") -> ConfigError:
    first = exc.errors()[0]
    path = _key_path(((prefix,) if prefix else ()) + tuple(first["loc"]))
    message = "unknown key" if first["type"] == "extra_forbidden" else first["msg"]
    if len(exc.errors()) > 1:
        message += f" (and {len(exc.errors()) - 1} more problem(s))"
    return ConfigError(message, path)


def parse_config(text: str) -> RunConfig:
    """Parse TOML, or JSON when the first non-blank character is '{'."""
    try:
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"malformed configuration: {exc}")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _config_error(exc) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except UnicodeDecodeError:
        raise ConfigError("configuration must be ASCII text", str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", str(path))
    return parse_config(text)


def echo_config(config: RunConfig) -> str:
    """Effective configuration with every default spelled out; parses back to an equal RunConfig."""
    return config.model_dump_json(indent=2) + "\n"


def build_problem(config: RunConfig, base_dir: Optional[Path] = None) -> ProblemDefinition:
    if config.mesh.file is not None:
        mesh = load_mesh(Path(base_dir or ".") / config.mesh.file)
    else:
        grid = config.mesh.grid
        mesh = build_from_spec(grid.model_copy(update={"fault_planes": grid.fault_planes + config.fault.planes}))
    try:
        problem = ProblemDefinition(
            name=config.name,
            mesh=mesh,
            materials=config.material,
            friction=FrictionParams.from_degrees(config.friction.cohesion, config.friction.friction_angle_deg),
            penalty=config.penalty,
            steps=config.ordered_steps(),
            enriched=config.fault.enriched,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(first["msg"], "steps" if "Step" in first["msg"] else "material") from exc
    logger.info("problem '%s': %d step(s), %d fault face(s)", problem.name, len(problem.steps), mesh.n_faces)
    return problem
