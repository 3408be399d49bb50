"""Walk through parsing logical forms and checking their structure.

Run: python3 demos/01_parse_and_validate.py
"""

from logictext import (
    bfs_function_nodes,
    classify_logic_type,
    collect_leaf_tokens,
    default_schema,
    linearize,
    node_counts,
    parse_logical_form,
    structure_verdict,
    tree_depth,
)

schema = default_schema()

form = "eq { hop { argmax { all_rows ; gold } ; nation } ; canada }"
tree = parse_logical_form(form)

print("form:      ", form)
print("canonical: ", linearize(tree))
print("depth:     ", tree_depth(tree))
print("nodes:     ", node_counts(tree))
print("functions: ", bfs_function_nodes(tree))
print("tokens:    ", sorted(collect_leaf_tokens(tree)))
print("logic type:", classify_logic_type(tree, schema).value)
print()

# the three structure rules in action
generations = [
    form,                                        # clean
    "eq { hop { all_rows ; nation } ; canada",   # missing closer -> rule 1
    "frob { all_rows ; nation }",                # unknown function -> rule 2
    "count { all_rows ; extra }",                # wrong arity -> rule 3
]
for raw in generations:
    v = structure_verdict(raw, schema, kappa=0.5)
    print(
        f"rule1={int(v.rule1_pass)} rule2={int(v.rule2_pass)} "
        f"rule3_avg={v.rule3_avg:.2f} overall={'PASS' if v.overall_pass else 'FAIL'}  {raw}"
    )
