"""
Плоский текстовый формат конфигурации эксперимента.

Одна строка - одна пара `key = value`, секции задаются префиксом через точку,
`#` начинает комментарий. Переопределения из командной строки (`key=value`)
имеют приоритет над файлом. Любая ошибка - ConfigError с именем ключа.
"""
import math
import re
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import ValidationError

from bardina.core.errors import ConfigError
from bardina.models.experiment import ExperimentConfig
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.CONFIG)

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PI_EXPR = re.compile(rf"^(?:(?P<mul>{_NUMBER})\s*\*\s*)?pi(?:\s*/\s*(?P<div>{_NUMBER}))?$")
_FRACTION = re.compile(rf"^(?P<num>{_NUMBER})\s*/\s*(?P<den>{_NUMBER})$")


# === Разбор значений ===

def _parse_float(raw: str) -> float:
    text = raw.strip().lower()
    match = _PI_EXPR.match(text)
    if match:
        value = math.pi * float(match.group('mul') or 1.0) / float(match.group('div') or 1.0)
    elif _FRACTION.match(text):
        parts = _FRACTION.match(text)
        value = float(parts.group('num')) / float(parts.group('den'))
    else:
        value = float(text)
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return value


def _parse_int(raw: str) -> int:
    text = raw.strip()
    if not re.fullmatch(r"[+-]?\d+", text):
        raise ValueError("expected an integer")
    return int(text)


def _parse_bool(raw: str) -> bool:
    text = raw.strip().lower()
    if text in ("true", "yes", "on", "1"):
        return True
    if text in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true or false")


def _parse_str(raw: str) -> str:
    text = raw.strip()
    if not text:
        raise ValueError("empty value")
    return text


def _parse_float_list(raw: str) -> Tuple[float, ...]:
    return tuple(_parse_float(item) for item in raw.split(","))


def _parse_int_list(raw: str) -> Tuple[int, ...]:
    return tuple(_parse_int(item) for item in raw.split(","))


def _parse_modes(raw: str) -> Tuple[Tuple[int, ...], ...]:
    return tuple(_parse_int_list(group) for group in raw.split(";") if group.strip())


def _optional(parser: Callable[[str], Any], empty: Any = None) -> Callable[[str], Any]:
    def parse(raw: str) -> Any:
        if raw.strip().lower() == "none":
            return empty
        return parser(raw)
    parse.__name__ = parser.__name__
    return parse


# === Вывод значений ===

def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        if not value:
            return "none"
        if isinstance(value[0], (list, tuple)):
            return ";".join(",".join(str(c) for c in group) for group in value)
        return ",".join(_format_value(item) for item in value)
    return str(value)


class KeySpec(NamedTuple):
    path: Tuple[str, ...]
    parse: Callable[[str], Any]
    description: str


KEY_SPECS: Dict[str, KeySpec] = {
    "domain.L": KeySpec(("grid", "L"), _parse_float, "box side length"),
    "grid.n_grid": KeySpec(("grid", "n_grid"), _parse_int, "modes per axis"),
    "grid.dealias_fraction": KeySpec(("grid", "dealias_fraction"), _parse_float, "dealiasing fraction"),
    "grid.observe_inclusive": KeySpec(("grid", "observe_inclusive"), _parse_bool, "observe |K| <= N"),
    "physics.nu": KeySpec(("physics", "nu"), _parse_float, "viscosity"),
    "physics.alpha_true": KeySpec(("physics", "alpha"), _parse_float, "hidden filter length"),
    "forcing.kind": KeySpec(("physics", "forcing", "kind"), _parse_str, "forcing kind"),
    "forcing.amplitude": KeySpec(("physics", "forcing", "amplitude"), _parse_float, "forcing amplitude"),
    "forcing.modes": KeySpec(("physics", "forcing", "mode_set"), _parse_modes, "forced wavevectors"),
    "initial.kind": KeySpec(("initial", "kind"), _parse_str, "initial condition"),
    "initial.amplitude": KeySpec(("initial", "amplitude"), _parse_float, "initial amplitude"),
    "initial.slope": KeySpec(("initial", "slope"), _parse_float, "random spectrum slope"),
    "initial.k_cut": KeySpec(("initial", "k_cut"), _parse_float, "random spectrum cut-off"),
    "recovery.alpha0": KeySpec(("schedule", "alpha0"), _parse_float, "lower bound of alpha"),
    "recovery.alpha1": KeySpec(("schedule", "alpha1"), _parse_float, "upper bound of alpha"),
    "recovery.beta1_sq": KeySpec(("schedule", "beta1_sq"), _parse_float, "initial guess of alpha^2"),
    "recovery.epsilon": KeySpec(("schedule", "epsilon"), _parse_float, "target gap"),
    "recovery.mode": KeySpec(("schedule", "mode"), _parse_str, "strict or practical"),
    "recovery.eta": KeySpec(("schedule", "eta"), _parse_float_list, "nudging gains per iteration"),
    "recovery.N_obs": KeySpec(("schedule", "N_obs"), _parse_int_list, "observation cutoffs per iteration"),
    "recovery.N_tilde": KeySpec(("schedule", "N_tilde"), _optional(_parse_int_list, ()), "zeta cutoffs per iteration"),
    "recovery.c_gn": KeySpec(("bounds", "c_gn"), _optional(_parse_float), "Gagliardo-Nirenberg constant"),
    "time.dt": KeySpec(("dt",), _parse_float, "time step"),
    "time.settle": KeySpec(("schedule", "settle"), _optional(_parse_float), "settle time"),
    "time.window": KeySpec(("schedule", "window"), _parse_float, "update window length"),
    "time.T_final": KeySpec(("schedule", "T_final"), _parse_float, "final time"),
    "time.max_iters": KeySpec(("schedule", "max_iters"), _parse_int, "iteration limit"),
    "strict.eta_min": KeySpec(("schedule", "eta_min"), _parse_float, "smallest eta of the strict ladder"),
    "strict.eta_max": KeySpec(("schedule", "eta_max"), _parse_float, "largest eta of the strict ladder"),
    "strict.eta_growth": KeySpec(("schedule", "eta_growth"), _parse_float, "ratio of the strict ladder"),
    "observer.w0": KeySpec(("observer", "w0"), _parse_str, "observer initial state"),
    "observer.derivatives": KeySpec(("observer", "derivatives"), _parse_str, "source of P_N u_t"),
    "nudging.stage_observation": KeySpec(("observer", "stage_observation"), _parse_str, "second-stage observation"),
    "bounds.M_A": KeySpec(("bounds", "M_A"), _optional(_parse_float), "bound of ||u0||"),
    "bounds.M_B": KeySpec(("bounds", "M_B"), _optional(_parse_float), "bound of ||grad u0||"),
    "bounds.M_C": KeySpec(("bounds", "M_C"), _optional(_parse_float), "bound of ||A u0||"),
    "bounds.margin": KeySpec(("bounds", "margin"), _parse_float, "margin on measured norms"),
    "diag.sample_every": KeySpec(("sample_every",), _parse_int, "observer snapshot stride"),
    "truth.dump_dir": KeySpec(("truth_dump_dir",), _optional(_parse_str), "pre-dumped truth directory"),
    "seed": KeySpec(("seed",), _parse_int, "random seed"),
    "output.dir": KeySpec(("output_dir",), _parse_str, "artifact directory"),
}

REQUIRED_KEYS = ("physics.nu", "physics.alpha_true", "recovery.alpha0", "recovery.alpha1", "recovery.beta1_sq")

# Значения эталонного эксперимента, не совпадающие с умолчаниями моделей
REFERENCE_DEFAULTS: Dict[str, str] = {
    "domain.L": "2*pi",
    "grid.n_grid": "32",
    "forcing.kind": "manufactured_steady",
    "forcing.amplitude": "0.5",
}

_SECTION_OF_PATH = {
    "grid": "grid",
    "physics": "physics",
    "initial": "initial",
    "schedule": "recovery",
    "bounds": "bounds",
    "observer": "observer",
}


class ConfigService:
    """Разбор, проверка и вывод конфигурации эксперимента."""

    @classmethod
    def parse_lines(cls, lines: Iterable[str], origin: str = "<config>") -> Dict[str, str]:
        """
        Сырые пары key -> value.

        Raises:
            ConfigError: Синтаксис, неизвестный или повторный ключ
        """
        values: Dict[str, str] = {}
        for number, line in enumerate(lines, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{origin}:{number}", f"expected 'key = value', got {text!r}")
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in KEY_SPECS:
                raise ConfigError(key, "unknown key")
            if key in values:
                raise ConfigError(key, "duplicate key")
            values[key] = value
        return values

    @classmethod
    def parse_override(cls, item: str) -> Tuple[str, str]:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in KEY_SPECS:
            raise ConfigError(key, "unknown key")
        return key, value

    @classmethod
    def build(cls, raw: Dict[str, str]) -> ExperimentConfig:
        """
        ExperimentConfig из сырых значений.

        Raises:
            ConfigError: Нет обязательного ключа, неверный тип или диапазон
        """
        for key in REQUIRED_KEYS:
            if key not in raw:
                raise ConfigError(key, "required key is missing")

        merged = {**REFERENCE_DEFAULTS, **raw}
        parsed: Dict[str, Any] = {}
        for key, value in merged.items():
            spec = KEY_SPECS[key]
            try:
                parsed[key] = spec.parse(value)
            except ValueError as e:
                raise ConfigError(key, f"cannot parse {value!r} as {spec.description}: {e}") from e

        if "recovery.epsilon" not in parsed:
            parsed["recovery.epsilon"] = 0.5 * parsed["recovery.alpha0"] ** 2
        cls._check_cross_keys(parsed)

        nested: Dict[str, Any] = {}
        for key, value in parsed.items():
            node = nested
            *parents, leaf = KEY_SPECS[key].path
            for name in parents:
                node = node.setdefault(name, {})
            node[leaf] = value

        try:
            return ExperimentConfig.model_validate(nested)
        except ValidationError as e:
            first = e.errors()[0]
            raise ConfigError(cls._key_for_loc(first['loc']), first['msg']) from e

    @staticmethod
    def _check_cross_keys(parsed: Dict[str, Any]) -> None:
        alpha0, alpha1 = parsed["recovery.alpha0"], parsed["recovery.alpha1"]
        if alpha0 <= 0:
            raise ConfigError("recovery.alpha0", "must be positive")
        if alpha1 < alpha0:
            raise ConfigError("recovery.alpha1", f"must not be smaller than alpha0={alpha0}")
        epsilon = parsed["recovery.epsilon"]
        if not 0.0 < epsilon < alpha0 ** 2:
            raise ConfigError(
                "recovery.epsilon",
                f"must satisfy 0<ε<α₀² (alpha0^2={alpha0 ** 2:.17g}, got {epsilon:.17g})",
            )
        beta1_sq = parsed["recovery.beta1_sq"]
        lo, hi = alpha0 ** 2, alpha1 ** 2
        if not lo * (1 - 1e-12) <= beta1_sq <= hi * (1 + 1e-12):
            raise ConfigError("recovery.beta1_sq", f"must lie in [alpha0^2, alpha1^2] = [{lo:.17g}, {hi:.17g}]")
        if parsed.get("recovery.mode") == "strict" and parsed.get("recovery.c_gn") is None:
            raise ConfigError("recovery.c_gn", "is required in strict mode")

    @staticmethod
    def _key_for_loc(loc: Sequence[Any]) -> str:
        path = tuple(str(part) for part in loc if not isinstance(part, int))
        best: Optional[str] = None
        best_len = 0
        for key, spec in KEY_SPECS.items():
            n = len(spec.path)
            if n > best_len and path[:n] == spec.path:
                best, best_len = key, n
        if best is not None:
            return best
        if path:
            return _SECTION_OF_PATH.get(path[0], path[0])
        return "config"

    @classmethod
    def parse_text(cls, text: str, overrides: Sequence[str] = (), origin: str = "<config>") -> ExperimentConfig:
        raw = cls.parse_lines(text.splitlines(), origin)
        for item in overrides:
            key, value = cls.parse_override(item)
            raw[key] = value
        return cls.build(raw)

    @classmethod
    def parse_config(cls, path: Path, overrides: Sequence[str] = ()) -> ExperimentConfig:
        """
        Читает файл конфигурации и применяет переопределения.

        Raises:
            ConfigError: Файл не найден или содержит ошибку
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config", f"file {path} does not exist")
        config = cls.parse_text(path.read_text(encoding="utf-8"), overrides, origin=str(path))
        log.debug(f"config {path} parsed with {len(overrides)} overrides")
        return config

    @classmethod
    def to_flat(cls, config: ExperimentConfig) -> Dict[str, str]:
        """Все ключи в текстовом виде (17 значащих цифр для чисел)."""
        dumped = config.model_dump(mode='json')
        flat: Dict[str, str] = {}
        for key, spec in KEY_SPECS.items():
            node: Any = dumped
            for name in spec.path:
                node = node[name]
            flat[key] = _format_value(node)
        return flat

    @classmethod
    def dump(cls, config: ExperimentConfig) -> str:
        lines: List[str] = ["# resolved experiment configuration"]
        lines += [f"{key} = {value}" for key, value in cls.to_flat(config).items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def write_resolved(cls, config: ExperimentConfig, path: Optional[Path] = None) -> Path:
        path = Path(path) if path is not None else Path(config.output_dir) / "resolved.cfg"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(cls.dump(config), encoding="utf-8")
        log.debug(f"resolved config written to {path}")
        return path

    @classmethod
    def summary(cls, config: ExperimentConfig) -> List[str]:
        s = config.schedule
        return [
            f"grid: L={config.grid.L:.6g}, n_grid={config.grid.n_grid}",
            f"physics: nu={config.physics.nu:.6g}, forcing={config.physics.forcing.kind.value}",
            f"recovery: mode={s.mode.value}, beta1^2={s.beta1_sq:.6g}, eta={list(s.eta)}, N={list(s.N_obs)}",
            f"time: dt<={config.dt:.6g}, T={s.T_final:.6g}, window={s.window:.6g}",
        ]


def parse_config(path: Path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    return ConfigService.parse_config(path, overrides)


__all__ = ['KEY_SPECS', 'REQUIRED_KEYS', 'ConfigService', 'parse_config']
