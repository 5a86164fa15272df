from relaysim.config import ScenarioConfig, seconds


def short(**kw) -> ScenarioConfig:
    """A short run for tests that need behaviour, not statistics."""
    kw.setdefault("duration", seconds(12))
    kw.setdefault("warmup", seconds(4))
    kw.setdefault("seeds", (1,))
    if kw.get("defense") == "Shape":
        kw.setdefault("measure_window", seconds(2))
    return ScenarioConfig(**kw)
