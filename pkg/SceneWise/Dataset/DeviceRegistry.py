"""
DeviceRegistry.py

Created: 09/17/26
Last Modified: 10/07/26

Description: The DeviceRegistry class holds the known devices, i.e. the
devices seen in training. Everything else is unknown at inference time.
"""
# Library Imports.
from dataclasses import replace

# Custom Imports.
from SceneWise.Dataset.Manifest import UNKNOWN_DEVICE, Manifest
from SceneWise.Errors.Errors import RegistryError


class DeviceRegistry:
    """
    Sorted set of known device ids. "unknown" is never a member and the set is
    never empty.
    """

    def __init__(self, knownDevices):
        devices = sorted(set(knownDevices))
        if not devices:
            raise RegistryError("A device registry needs at least one known device.")
        if UNKNOWN_DEVICE in devices:
            raise RegistryError(
                "'" + UNKNOWN_DEVICE + "' cannot be registered as a known device."
            )
        self._knownDevices = tuple(devices)

    def __eq__(self, other):
        if not isinstance(other, DeviceRegistry):
            return NotImplemented
        return self._knownDevices == other._knownDevices

    def __len__(self):
        return len(self._knownDevices)

    def __contains__(self, deviceId):
        return self.isKnown(deviceId)

    def getKnownDevices(self):
        return list(self._knownDevices)

    def isKnown(self, deviceId):
        return deviceId in self._knownDevices

    def requireKnown(self, deviceId):
        """Raises RegistryError unless the device was seen in training."""
        if not self.isKnown(deviceId):
            raise RegistryError(
                "Device '"
                + str(deviceId)
                + "' is not a known device; known devices are "
                + ", ".join(self._knownDevices)
                + "."
            )

    def maskUnknownDevices(self, manifest):
        """
        Evaluation-style copy of a manifest: devices outside the registry become
        "unknown", and scene labels and identifiers (cities) are withheld.
        """
        entries = [
            replace(
                entry,
                deviceId=entry.deviceId if self.isKnown(entry.deviceId) else UNKNOWN_DEVICE,
                sceneLabel=None,
                identifier=None,
            )
            for entry in manifest.entries
        ]
        return Manifest(entries, "test", manifest.root)

    def toList(self):
        return list(self._knownDevices)


def buildRegistry(trainManifest):
    """
    Parameters
    ----------
    trainManifest: Manifest
        Labeled training manifest.

    Returns
    -------
    DeviceRegistry: distinct devices of the manifest, sorted.
    """
    devices = set(trainManifest.getDevices())
    if UNKNOWN_DEVICE in devices:
        raise RegistryError(
            "Training manifest contains entries with device '" + UNKNOWN_DEVICE + "'."
        )
    return DeviceRegistry(devices)
