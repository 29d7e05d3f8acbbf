@Test
@IR(failOn = {IRNode.ADD})
@IR(counts = {IRNode.SUB, "1"})
// Checks (a - b) + (c - a) => (c - b)
public long testpAdd6(long a, long b, long c) {
  return (a - b) + (c - a);
}
