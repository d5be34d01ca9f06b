class DualDriveException(Exception):
    pass


class InvalidConfigException(DualDriveException):
    pass


class UnknownTrackException(DualDriveException):
    pass


class UnknownScenarioException(DualDriveException):
    pass
