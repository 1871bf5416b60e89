"""Versioned prompt templates with named interpolation slots.

Templates are content-hashed downstream, so whitespace-only edits do not
invalidate recorded transcripts. Structured header lines (``## key: value``)
keep prompts machine-readable for tooling and fixtures.
"""

PROMPT_VERSION = "1"

INTERFACE = """\
## stage: interface
## version: {version}
You are designing a library of cuboid shape abstraction functions.
Convert each function description below into a ShapeScript interface:
a typed signature whose first parameter is a CoordFrame (`cf: Frame`),
returning `PartList`, preceded by a doc comment with `@description`,
`@parts`, `@valid_options` (every entry must be greater than 1) and one
`@param` line per non-frame parameter. String-like parameters must be
declared as `enum(...)` with their full option list. Emit only ShapeScript
source, one `fn name(...) -> PartList;` signature per description.

Function descriptions:
{descriptions}
"""

INTERFACE_REPAIR = """\
## stage: interface
## version: {version}
## repair: 1
Your previous interface response had problems:
{violations}

Re-emit the full corrected ShapeScript interface. Previous response:
{previous}
"""

APPLICATIONS = """\
## stage: applications
## version: {version}
## shape: {shape_id}
## round: {round}
Here is a shape as a list of labeled cuboid parts (width, height, depth,
center x, center y, center z). Write calls to the library functions that
explain groups of these parts. Identify each group with a
group_parts([...]) call listing the exact part boxes the function should
reproduce. Use `?` for parameter values you are unsure about.

Library interface:
{interface}

Shape parts:
{parts}
{shape_description}
Respond with one call per line, e.g.:
fn_name(group_parts([part(w, h, d, x, y, z), ...]), arg_or_?, ...);
"""

IMPLEMENTATIONS = """\
## stage: implementations
## version: {version}
## function: {fn_name}
## impl: {impl_index}
Write a ShapeScript body for this library function. Every parameter must
change the output geometry, and parts should rest on or connect to the
structure rather than float. After the implementation, guess a concrete
parameterization that recreates each input example, one line per example:
`reparam <example index>: value, value, ...`.

Function interface:
{interface}

Input-output examples (parameters masked with `?`):
{examples}
"""

IMPLEMENTATIONS_RETRY = """\
## stage: implementations
## version: {version}
## function: {fn_name}
## impl: {impl_index}
## retry: 1
Your previous implementation failed to parse:
{error}

Previous response:
{previous}

Re-emit a complete, valid ShapeScript function definition (with body),
followed by the `reparam` lines.
"""

SAMPLER = """\
## stage: sampler
## version: {version}
## round: {round}
Author a stochastic `sample_shape` ShapeScript function over this library.
It takes a single CoordFrame argument bounding the whole shape and emits a
random plausible shape each run, using the RNG builtins (uniform, randint,
choice, bernoulli) to vary structure and parameters. Name the function
sample_shape_v{round}.

Library:
{library}

Example programs for seed shapes:
{seed_programs}
{feedback}
"""

SAMPLER_FEEDBACK = """\
Coverage feedback from running your previous sampler:
{issues}
Produce a new variation that addresses these gaps.
"""

EDIT = """\
## stage: edit
## version: {version}
Edit this ShapeScript program to satisfy the request. Emit only the full
edited program.

Program:
{program}

Library interface:
{interface}

Request: {request}
"""

EDIT_REPAIR = """\
## stage: edit
## version: {version}
## repair: 1
Your previous edit failed to parse or type-check:
{error}

Previous response:
{previous}

Re-emit the full corrected program.
"""
