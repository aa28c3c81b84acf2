VERSION = "1.0.0"


class HttpStatus:
    # 2xx Success
    HTTP_200_OK = 200

    # 4xx Client Errors
    HTTP_400_BAD_REQUEST = 400
    HTTP_404_NOT_FOUND = 404
    HTTP_422_UNPROCESSABLE_ENTITY = 422

    # 5xx Server Errors
    HTTP_500_INTERNAL_SERVER_ERROR = 500


class ExitCode:
    SUCCESS = 0
    USAGE_ERROR = 1
    SECTION_VIOLATION = 2
    IDENTITY_VIOLATED = 3
    COLLISION_WITNESS = 4
    NOT_CONVERGED = 5
