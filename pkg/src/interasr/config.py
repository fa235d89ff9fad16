"""Run configuration: TOML file declaring per-role bindings, templates,
simulation parameters, and caching."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .agents import TemplateSet
from .errors import ConfigError
from .gateway import BackendBinding, ModelGateway, Sampling, ScenarioScript, ROLES


@dataclass
class RunConfig:
    bindings: dict[str, BackendBinding]
    templates_dir: str | None = None
    normalization_profile: str = "default"
    max_loops: int = 10
    mode: str = "text_shortcut"
    seed: int = 0
    workers: int = 4
    cache_dir: str | None = None
    max_concurrency: int = 8

    def load_templates(self) -> TemplateSet:
        return TemplateSet.load(self.templates_dir)

    def build_gateway(self, **overrides) -> ModelGateway:
        kwargs = dict(cache_dir=self.cache_dir, max_concurrency=self.max_concurrency)
        kwargs.update(overrides)
        return ModelGateway(self.bindings, **kwargs)


def _binding_from_table(role: str, table: dict, base_dir: Path) -> BackendBinding:
    provider = table.get("provider")
    sampling = Sampling(
        temperature=float(table.get("temperature", 0.0)),
        max_tokens=int(table.get("max_tokens", 1024)),
    )
    if provider == "live":
        return BackendBinding(
            role=role,
            provider="live",
            endpoint=table.get("endpoint"),
            model_name=table.get("model_name"),
            sampling=sampling,
            cache=table.get("cache"),
        )
    if provider == "scripted":
        script_path = table.get("script")
        script = ScenarioScript()
        if script_path:
            script = ScenarioScript.from_jsonl(base_dir / script_path)
        if table.get("policy"):
            script.set_default_policy(role, table["policy"])
        return BackendBinding(role=role, provider="scripted", script=script, sampling=sampling)
    raise ConfigError(f"binding {role!r} has unknown provider {provider!r}")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}")

    binding_tables = data.get("bindings", {})
    bindings = {}
    for role, table in binding_tables.items():
        if role not in ROLES:
            raise ConfigError(f"unknown binding role {role!r}")
        bindings[role] = _binding_from_table(role, table, path.parent)
    if "llm" not in bindings:
        raise ConfigError("config must bind the llm role")

    run = data.get("run", {})
    templates = data.get("templates", {})
    cache = data.get("cache", {})
    templates_dir = templates.get("dir")
    if templates_dir:
        templates_dir = str(path.parent / templates_dir)
    cache_dir = cache.get("dir")
    if cache_dir:
        cache_dir = str(path.parent / cache_dir)
    return RunConfig(
        bindings=bindings,
        templates_dir=templates_dir,
        normalization_profile=run.get("normalization_profile", "default"),
        max_loops=int(run.get("max_loops", 10)),
        mode=run.get("mode", "text_shortcut"),
        seed=int(run.get("seed", 0)),
        workers=int(run.get("workers", 4)),
        cache_dir=cache_dir,
        max_concurrency=int(run.get("max_concurrency", 8)),
    )
