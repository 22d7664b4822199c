"""
ComplexityAuditor.py

Created: 09/16/26
Last Modified: 10/12/26

Description: Counts multiply-accumulate operations, parameters and parameter
memory of a ModelGraph and checks them against the task budget
(128,000 bytes of parameters, 30,000,000 MACs for a one-second clip).

Accounting rules:

    conv2d           MACs = outF * outT * outC * (inC / groups) * kF * kT
                     params = outC * (inC / groups) * kF * kT (+ outC bias)
    linear           MACs = in * out, params = in * out + out
    batchnorm2d      0 MACs (folded into the conv for deployment),
                     params = 2 * C (+ 2 * C running statistics on request)
    relu, pooling    0 MACs, 0 params

One kB is 1000 bytes.
"""
# Library Imports.
import json
from dataclasses import dataclass, field

import jsbeautifier

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError

# Bits per stored value for each accepted precision name.
PRECISION_BITS = {"int8": 8, "fp16": 16, "fp32": 32, 8: 8, 16: 16, 32: 32}


@dataclass(frozen=True)
class Budget:
    maxMemoryBytes: int = 128000
    maxMacs: int = 30000000

    def __post_init__(self):
        if self.maxMemoryBytes <= 0 or self.maxMacs <= 0:
            raise ConfigurationError("Budget limits must both be > 0.")


@dataclass
class LayerComplexity:
    name: str
    kind: str
    macs: int
    params: int


@dataclass
class ComplexityReport:
    """
    Per-layer rows, totals and, once checked, the budget verdict.
    """

    rows: list
    totalMacs: int
    totalParams: int
    precisionBits: int
    memoryBytes: int
    budget: Budget = None
    passed: bool = None
    failures: list = field(default_factory=list)
    title: str = ""

    def toDict(self):
        return {
            "title": self.title,
            "layers": [
                {"name": row.name, "kind": row.kind, "macs": row.macs, "params": row.params}
                for row in self.rows
            ],
            "total_macs": self.totalMacs,
            "total_params": self.totalParams,
            "precision_bits": self.precisionBits,
            "memory_bytes": self.memoryBytes,
            "memory_kb": self.memoryBytes / 1000.0,
            "max_memory_bytes": self.budget.maxMemoryBytes if self.budget else None,
            "max_macs": self.budget.maxMacs if self.budget else None,
            "verdict": None if self.passed is None else ("pass" if self.passed else "fail"),
            "failures": list(self.failures),
        }

    def renderTable(self):
        """
        Returns
        -------
        String: aligned text table with one row per layer and a totals block.
        """
        nameWidth = max([len("layer")] + [len(row.name) for row in self.rows])
        kindWidth = max([len("kind")] + [len(row.kind) for row in self.rows])
        header = (
            "layer".ljust(nameWidth)
            + "  "
            + "kind".ljust(kindWidth)
            + "  "
            + "MACs".rjust(12)
            + "  "
            + "params".rjust(9)
        )
        lines = []
        if self.title:
            lines.append(self.title)
        lines += [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                row.name.ljust(nameWidth)
                + "  "
                + row.kind.ljust(kindWidth)
                + "  "
                + format(row.macs, ",").rjust(12)
                + "  "
                + format(row.params, ",").rjust(9)
            )
        lines.append("-" * len(header))
        lines.append("total MACs:   " + format(self.totalMacs, ","))
        lines.append("total params: " + format(self.totalParams, ","))
        lines.append(
            "memory:       "
            + format(self.memoryBytes, ",")
            + " B ("
            + format(self.memoryBytes / 1000.0, ".1f")
            + " kB at "
            + str(self.precisionBits)
            + "-bit)"
        )
        if self.passed is not None:
            verdict = "PASS" if self.passed else "FAIL (" + ", ".join(self.failures) + ")"
            lines.append(
                "budget:       "
                + format(self.budget.maxMemoryBytes, ",")
                + " B / "
                + format(self.budget.maxMacs, ",")
                + " MACs -> "
                + verdict
            )
        return "\n".join(lines)

    def save(self, path):
        options = jsbeautifier.default_options()
        options.indent_size = 4
        with open(path, "w", encoding="utf-8") as reportFile:
            reportFile.write(jsbeautifier.beautify(json.dumps(self.toDict()), options))


def getPrecisionBits(precision):
    if precision not in PRECISION_BITS:
        raise ConfigurationError(
            "Unsupported precision '" + str(precision) + "'; expected int8, fp16 or fp32."
        )
    return PRECISION_BITS[precision]


def countMacs(graph, inputShape=None):
    """
    Parameters
    ----------
    graph: ModelGraph
        Graph to count. Raises GraphValidationError if shapes do not chain.
    inputShape: tuple
        (channels, freq, time); defaults to the graph's input shape.

    Returns
    -------
    tuple: (list of (layer name, MACs), total MACs).
    """
    shapes = graph.getLayerShapes(inputShape)
    rows = [
        (layer.getName(), int(layer.getMacs(shapes[index])))
        for index, layer in enumerate(graph.buildLayers())
    ]
    return rows, sum(macs for _, macs in rows)


def countParams(graph, includeBnRunningStats=False):
    """
    Returns
    -------
    tuple: (list of (layer name, params), total params).
    """
    shapes = graph.getLayerShapes()
    rows = [
        (layer.getName(), int(layer.getParamCount(shapes[index], includeBnRunningStats)))
        for index, layer in enumerate(graph.buildLayers())
    ]
    return rows, sum(params for _, params in rows)


def memoryBytes(totalParams, precision):
    """
    Parameters
    ----------
    totalParams: int
        Number of stored values.
    precision: int or String
        8, 16, 32 bits, or "int8", "fp16", "fp32".

    Returns
    -------
    int: totalParams * bits / 8.
    """
    return int(totalParams) * getPrecisionBits(precision) // 8


def checkBudget(report, budget=None):
    """
    Records the verdict on the report and returns it.

    Returns
    -------
    tuple: (passed, list of violated dimensions among "memory" and "macs").
    """
    budget = budget if budget is not None else Budget()
    failures = []
    if report.memoryBytes > budget.maxMemoryBytes:
        failures.append("memory")
    if report.totalMacs > budget.maxMacs:
        failures.append("macs")
    report.budget = budget
    report.passed = not failures
    report.failures = failures
    return report.passed, failures


def auditGraph(graph, precision="fp16", budget=None, includeBnRunningStats=False, title=""):
    """
    Builds the complexity report of a graph and checks it against the budget.

    Returns
    -------
    ComplexityReport: rows, totals and verdict.
    """
    bits = getPrecisionBits(precision)
    macRows, totalMacs = countMacs(graph)
    paramRows, totalParams = countParams(graph, includeBnRunningStats)
    rows = [
        LayerComplexity(name, spec.kind, macs, params)
        for (name, macs), (_, params), spec in zip(macRows, paramRows, graph.layers)
    ]
    report = ComplexityReport(
        rows, totalMacs, totalParams, bits, memoryBytes(totalParams, bits), title=title
    )
    checkBudget(report, budget)
    return report
