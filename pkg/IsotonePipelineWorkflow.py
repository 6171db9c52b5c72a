from datetime import timedelta

from temporalio import workflow
from temporalio.common import RetryPolicy
from temporalio.exceptions import ApplicationError

with workflow.unsafe.imports_passed_through():
    from activities import extract, load, transform, validate
    from dataobjects import PipelineParams, ProblemFormatError


@workflow.defn
class IsotonePipelineWorkflow:

    def __init__(self) -> None:
        self._progress = 0

    @workflow.run
    async def run(self, input: PipelineParams) -> str:
        workflow.logger.info(f"Isotone pipeline for {input.input_path} beginning.")

        validation = await workflow.execute_activity(
            validate,
            input,
            start_to_close_timeout=timedelta(seconds=60),
        )
        if validation == False:
            workflow.logger.info(f"Validation rejected for: {input.input_path}")
            raise ApplicationError("Workflow failed due to validation") from ProblemFormatError("Validation Failed")

        # Set progress to 20%
        self._progress = 20

        problem = await workflow.execute_activity(
            extract,
            input,
            start_to_close_timeout=timedelta(seconds=60),
        )
        workflow.logger.info(f"Extract status: {input.input_path}: {len(problem.values)} cells")

        # Set progress to 40%
        self._progress = 40

        payload = await workflow.execute_activity(
            transform,
            args=[input, problem],
            start_to_close_timeout=timedelta(seconds=600),
            heartbeat_timeout=timedelta(seconds=120),
            retry_policy=RetryPolicy(maximum_attempts=3),
        )
        workflow.logger.info(f"Transform status: {input.input_path}: certified={payload.certified}")

        # Set progress to 80%
        self._progress = 80

        activity_output = await workflow.execute_activity(
            load,
            args=[input, payload],
            start_to_close_timeout=timedelta(seconds=60),
        )
        workflow.logger.info(f"Load status: {input.input_path}: {activity_output}")

        # Set progress to 100%
        self._progress = 100

        return f"Processed {input.input_path}: {activity_output}"

    @workflow.query
    def progress(self) -> int:
        return self._progress
