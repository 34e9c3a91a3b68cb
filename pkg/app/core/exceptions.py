class PanoException(Exception):
    """Base exception for the pano360 toolkit."""
    exit_code: int = 1

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class PreconditionViolation(PanoException, ValueError):
    """Exception raised when an operation is called outside its domain."""
    exit_code = 2

    def __init__(self, operation: str, reason: str):
        self.operation = operation
        super().__init__(detail=f"{operation}: {reason}")


class InconsistentTrajectory(PanoException):
    """Exception raised when anchor frames and poses do not line up."""
    exit_code = 3

    def __init__(self, detail: str):
        super().__init__(detail=detail)


class NoAnchorRegion(PanoException):
    """Exception raised when a mask has no known pixel to inscribe into."""
    exit_code = 3

    def __init__(self, shape: tuple[int, ...]):
        super().__init__(detail=f"Mask of shape {shape} contains no anchor pixel")


class AnchorSweepTooLarge(PanoException):
    """Exception raised when the per-frame masks share no common pixel."""
    exit_code = 3

    def __init__(self, frame_count: int):
        super().__init__(
            detail=f"Intersection of {frame_count} frame masks is empty; "
                   f"trajectory sweeps too far for a fixed anchor crop"
        )


class CorruptEstimates(PanoException):
    """Exception raised when pitch estimates contain non-finite values."""
    exit_code = 4

    def __init__(self, source: str, bad_frames: list[int]):
        super().__init__(
            detail=f"Non-finite pitch estimates in {source} at frames {bad_frames[:10]}"
        )


class EstimateFileError(PanoException):
    """Exception raised when a pitch estimate file cannot be used."""
    exit_code = 4

    def __init__(self, path: str, reason: str):
        super().__init__(detail=f"Estimate file {path}: {reason}")


class DuplicateClipId(PanoException):
    """Exception raised when a manifest contains the same clip id twice."""
    exit_code = 4

    def __init__(self, clip_id: str):
        self.clip_id = clip_id
        super().__init__(detail=f"Clip id '{clip_id}' already exists in manifest")


class EmptyFlowStats(PanoException):
    """Exception raised when flow statistics have no frames."""
    exit_code = 4

    def __init__(self, clip_id: str = "<unnamed>"):
        super().__init__(detail=f"Flow statistics for clip '{clip_id}' are empty")


class FrameFormatError(PanoException):
    """Exception raised when frame files cannot be read or are inconsistent."""
    exit_code = 5

    def __init__(self, path: str, reason: str):
        super().__init__(detail=f"Frame file {path}: {reason}")


class MaskFormatError(PanoException):
    """Exception raised when a cross-domain mask file is malformed."""
    exit_code = 5

    def __init__(self, path: str, reason: str):
        super().__init__(detail=f"Mask file {path}: {reason}")


class ValidationFailed(PanoException):
    """Exception raised when a verification command does not pass."""
    exit_code = 6

    def __init__(self, check: str, detail: str):
        self.check = check
        super().__init__(detail=f"{check} failed: {detail}")
