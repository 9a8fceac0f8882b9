def main():
    result = int(input("Enter a number: "))
    if result > 10:
        print("big")
    elif result > 5:
        print("medium")
    else:
        print("small")

main()
