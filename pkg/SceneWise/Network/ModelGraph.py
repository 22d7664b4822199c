"""
ModelGraph.py

Created: 09/07/26
Last Modified: 10/12/26

Description: The ModelGraph class holds the ordered layer list of a network,
its input shape and class count. Graphs are read from and written to a small
line-oriented text format:

    # comment
    input 1 256 65
    classes 10
    conv2d name=stem in=1 out=40 kernel=3,3 stride=2,2 padding=1,1 bias=false
    batchnorm2d name=stem_bn channels=40
    relu
    avg_pool2d kernel=2,2 stride=2,2
    global_avg_pool
    linear name=classifier in=160 out=10

Keys per kind:

    conv2d           in, out, kernel (required); stride=1,1 padding=0,0
                     groups=1 bias=true
    batchnorm2d      channels (required)
    relu             -
    avg_pool2d       kernel (required); stride defaults to kernel
    global_avg_pool  -
    linear           in, out (required)

Every kind accepts name=; unnamed layers are called <kind>_<index>.
"""
# Library Imports.
from dataclasses import dataclass

# Custom Imports.
from SceneWise.Errors.Errors import GraphParseError, GraphValidationError
from SceneWise.Network.Layers.AvgPool2D import AvgPool2D, GlobalAvgPool
from SceneWise.Network.Layers.BatchNorm2D import BatchNorm2D
from SceneWise.Network.Layers.Conv2D import Conv2D
from SceneWise.Network.Layers.Linear import Linear
from SceneWise.Network.Layers.ReLU import ReLU


@dataclass(frozen=True)
class LayerSpec:
    """
    Hyperparameters of one layer. Fields that do not apply to a kind keep their
    defaults.
    """

    kind: str
    name: str
    inChannels: int = 0
    outChannels: int = 0
    kernel: tuple = (1, 1)
    stride: tuple = (1, 1)
    padding: tuple = (0, 0)
    groups: int = 1
    bias: bool = True
    channels: int = 0


# Layer class of every kind the grammar accepts.
LAYER_KINDS = {
    "conv2d": Conv2D,
    "batchnorm2d": BatchNorm2D,
    "relu": ReLU,
    "avg_pool2d": AvgPool2D,
    "global_avg_pool": GlobalAvgPool,
    "linear": Linear,
}

# Accepted keys per kind, beyond name.
_KIND_KEYS = {
    "conv2d": ("in", "out", "kernel", "stride", "padding", "groups", "bias"),
    "batchnorm2d": ("channels",),
    "relu": (),
    "avg_pool2d": ("kernel", "stride"),
    "global_avg_pool": (),
    "linear": ("in", "out"),
}

_REQUIRED_KEYS = {
    "conv2d": ("in", "out", "kernel"),
    "batchnorm2d": ("channels",),
    "avg_pool2d": ("kernel",),
    "linear": ("in", "out"),
}


class ModelGraph:
    """
    Ordered list of LayerSpecs plus the (channels, freq, time) input shape and
    the number of output classes. Two graphs are equal when their layer lists,
    input shapes and class counts are equal.
    """

    def __init__(self, inputShape, classCount, layers):
        """
        Parameters
        ----------
        inputShape: tuple
            (channels, mel bins, frames) of one example.
        classCount: int
            Number of logits the graph must produce.
        layers: list
            LayerSpec objects in execution order.
        """
        self.inputShape = tuple(int(v) for v in inputShape)
        self.classCount = int(classCount)
        self.layers = list(layers)

    def __eq__(self, other):
        if not isinstance(other, ModelGraph):
            return NotImplemented
        return (
            self.inputShape == other.inputShape
            and self.classCount == other.classCount
            and self.layers == other.layers
        )

    def __repr__(self):
        return (
            "ModelGraph(input="
            + str(self.inputShape)
            + ", classes="
            + str(self.classCount)
            + ", layers="
            + str(len(self.layers))
            + ")"
        )

    def buildLayers(self):
        """
        Instantiates a Layer object per spec.

        Returns
        -------
        list: Layer objects in execution order.
        """
        return [LAYER_KINDS[spec.kind](spec) for spec in self.layers]

    def getLayerShapes(self, inputShape=None):
        """
        Chains shapes through the graph and checks that the last layer emits
        classCount logits.

        Parameters
        ----------
        inputShape: tuple
            Overrides the graph's input shape, i.e. for longer clips.

        Returns
        -------
        list: input shape of every layer followed by the output shape.
        Raises GraphValidationError if any layer rejects its input.
        """
        shape = tuple(inputShape) if inputShape is not None else self.inputShape
        if not self.layers:
            raise GraphValidationError("Graph has no layers.")

        names = set()
        shapes = [shape]
        for layer in self.buildLayers():
            if layer.getName() in names:
                raise GraphValidationError(
                    "Layer name '" + layer.getName() + "' is used twice."
                )
            names.add(layer.getName())
            shape = layer.getOutputShape(shape)
            shapes.append(shape)

        if shape != (self.classCount,):
            raise GraphValidationError(
                "Graph output shape "
                + str(shape)
                + " does not match classes="
                + str(self.classCount)
                + "."
            )
        return shapes

    def validate(self):
        """Raises GraphValidationError unless shapes chain to classCount logits."""
        self.getLayerShapes()

    def toText(self):
        """
        Serializes the graph in the text format read by parseGraph().

        Returns
        -------
        String: graph definition, one layer per line.
        """
        lines = [
            "input " + " ".join(str(v) for v in self.inputShape),
            "classes " + str(self.classCount),
        ]
        for spec in self.layers:
            fields = [spec.kind, "name=" + spec.name]
            if spec.kind == "conv2d":
                fields += [
                    "in=" + str(spec.inChannels),
                    "out=" + str(spec.outChannels),
                    "kernel=" + _pair(spec.kernel),
                    "stride=" + _pair(spec.stride),
                    "padding=" + _pair(spec.padding),
                    "groups=" + str(spec.groups),
                    "bias=" + ("true" if spec.bias else "false"),
                ]
            elif spec.kind == "batchnorm2d":
                fields.append("channels=" + str(spec.channels))
            elif spec.kind == "avg_pool2d":
                fields += ["kernel=" + _pair(spec.kernel), "stride=" + _pair(spec.stride)]
            elif spec.kind == "linear":
                fields += ["in=" + str(spec.inChannels), "out=" + str(spec.outChannels)]
            lines.append(" ".join(fields))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as graphFile:
            graphFile.write(self.toText())


def _pair(values):
    return str(values[0]) + "," + str(values[1])


def _parseInt(value, key, lineNumber):
    try:
        return int(value)
    except ValueError:
        raise GraphParseError(
            "'" + key + "' expects an integer, got '" + value + "'.", lineNumber
        )


def _parsePair(value, key, lineNumber):
    parts = value.split(",")
    if len(parts) != 2:
        raise GraphParseError(
            "'" + key + "' expects two comma separated integers, got '" + value + "'.",
            lineNumber,
        )
    return (_parseInt(parts[0], key, lineNumber), _parseInt(parts[1], key, lineNumber))


def _parseLayer(tokens, index, lineNumber):
    kind = tokens[0]
    if kind not in LAYER_KINDS:
        raise GraphParseError(
            "unknown layer kind '"
            + kind
            + "'; expected one of "
            + ", ".join(sorted(LAYER_KINDS))
            + ".",
            lineNumber,
        )

    values = {}
    for token in tokens[1:]:
        key, sep, value = token.partition("=")
        if not sep or not value:
            raise GraphParseError("expected key=value, got '" + token + "'.", lineNumber)
        if key != "name" and key not in _KIND_KEYS[kind]:
            raise GraphParseError(
                "key '" + key + "' is not valid for " + kind + ".", lineNumber
            )
        if key in values:
            raise GraphParseError("key '" + key + "' given twice.", lineNumber)
        values[key] = value

    for key in _REQUIRED_KEYS.get(kind, ()):
        if key not in values:
            raise GraphParseError(kind + " requires '" + key + "='.", lineNumber)

    fields = {"kind": kind, "name": values.get("name", kind + "_" + str(index))}
    if "in" in values:
        fields["inChannels"] = _parseInt(values["in"], "in", lineNumber)
    if "out" in values:
        fields["outChannels"] = _parseInt(values["out"], "out", lineNumber)
    if "channels" in values:
        fields["channels"] = _parseInt(values["channels"], "channels", lineNumber)
    if "groups" in values:
        fields["groups"] = _parseInt(values["groups"], "groups", lineNumber)
    if "kernel" in values:
        fields["kernel"] = _parsePair(values["kernel"], "kernel", lineNumber)
    if "padding" in values:
        fields["padding"] = _parsePair(values["padding"], "padding", lineNumber)
    if "stride" in values:
        fields["stride"] = _parsePair(values["stride"], "stride", lineNumber)
    elif kind == "avg_pool2d":
        fields["stride"] = fields["kernel"]
    if "bias" in values:
        flag = values["bias"].lower()
        if flag not in ("true", "false"):
            raise GraphParseError(
                "'bias' expects true or false, got '" + values["bias"] + "'.", lineNumber
            )
        fields["bias"] = flag == "true"
    return LayerSpec(**fields)


def parseGraph(text):
    """
    Parses a graph definition.

    Parameters
    ----------
    text: String
        Contents of a graph file.

    Returns
    -------
    ModelGraph: the parsed, shape-validated graph.
    Raises GraphParseError (with the 1-based line number) for grammar errors
    and GraphValidationError when the shapes do not chain.
    """
    inputShape = None
    classCount = None
    layers = []

    for lineNumber, rawLine in enumerate(text.splitlines(), start=1):
        line = rawLine.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()

        if tokens[0] == "input":
            if inputShape is not None:
                raise GraphParseError("'input' given twice.", lineNumber)
            if len(tokens) != 4:
                raise GraphParseError("'input' expects C F T.", lineNumber)
            inputShape = tuple(_parseInt(v, "input", lineNumber) for v in tokens[1:])
            if min(inputShape) < 1:
                raise GraphParseError("'input' dimensions must be >= 1.", lineNumber)
        elif tokens[0] == "classes":
            if classCount is not None:
                raise GraphParseError("'classes' given twice.", lineNumber)
            if len(tokens) != 2:
                raise GraphParseError("'classes' expects one integer.", lineNumber)
            classCount = _parseInt(tokens[1], "classes", lineNumber)
            if classCount < 1:
                raise GraphParseError("'classes' must be >= 1.", lineNumber)
        else:
            layers.append(_parseLayer(tokens, len(layers), lineNumber))

    if inputShape is None:
        raise GraphParseError("graph is missing the 'input C F T' line.")
    if classCount is None:
        raise GraphParseError("graph is missing the 'classes N' line.")

    graph = ModelGraph(inputShape, classCount, layers)
    graph.validate()
    return graph


def loadGraph(path):
    """
    Reads and parses a graph file. Parse errors are prefixed with the path.
    """
    try:
        with open(path, "r", encoding="utf-8") as graphFile:
            text = graphFile.read()
    except OSError as e:
        raise GraphParseError("Cannot read graph file " + str(path) + ": " + str(e))

    try:
        return parseGraph(text)
    except GraphParseError as e:
        error = GraphParseError(str(path) + ": " + str(e))
        error.lineNumber = e.lineNumber
        raise error from e
